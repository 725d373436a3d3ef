//! Plot-ready CSV files. Numbers use the shortest decimal form that
//! round-trips, so values re-read from disk are bit-identical.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use qdecay_core::{MemoryKernel64, TclCoefficients64, TimeGrid64};

use crate::scenario::Trajectory;

/// Shortest round-trip form, with `-0` folded into `0`.
struct Num(f64);

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0 + 0.0)
    }
}

fn create(path: &Path) -> std::io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// `t,rho11,rho00,re_rho10,im_rho10`; rows past a breakdown are NaN.
pub fn write_trajectory(dir: &Path, grid: &TimeGrid64, traj: &Trajectory) -> std::io::Result<()> {
    let mut w = create(&dir.join(format!("{}.csv", traj.method.name())))?;
    writeln!(w, "t,rho11,rho00,re_rho10,im_rho10")?;
    for (i, t) in grid.times().enumerate() {
        match traj.states.get(i) {
            Some(s) => writeln!(
                w,
                "{},{},{},{},{}",
                Num(t),
                Num(s.rho11),
                Num(s.rho00()),
                Num(s.rho10.re),
                Num(s.rho10.im)
            )?,
            None => writeln!(w, "{},NaN,NaN,NaN,NaN", Num(t))?,
        }
    }
    w.flush()
}

pub fn write_kernel(dir: &Path, kernel: &MemoryKernel64) -> std::io::Result<()> {
    let mut w = create(&dir.join("kernel.csv"))?;
    writeln!(w, "t,epsilon,k1,k2")?;
    for (i, t) in kernel.grid().times().enumerate() {
        writeln!(
            w,
            "{},{},{},{}",
            Num(t),
            Num(kernel.epsilon.get(i)),
            Num(kernel.k1.get(i)),
            Num(kernel.k2.get(i))
        )?;
    }
    w.flush()
}

/// `t,gamma,S` from the exact coefficients, followed by
/// `gamma_order<n>,S_order<n>` for each truncated series supplied.
pub fn write_rates(
    dir: &Path,
    exact: &TclCoefficients64,
    truncated: &[(usize, TclCoefficients64)],
) -> std::io::Result<()> {
    let mut w = create(&dir.join("tcl_rates.csv"))?;
    write!(w, "t,gamma,S")?;
    for (order, _) in truncated {
        write!(w, ",gamma_order{order},S_order{order}")?;
    }
    writeln!(w)?;
    for (i, t) in exact.grid().times().enumerate() {
        write!(
            w,
            "{},{},{}",
            Num(t),
            Num(exact.gamma.get(i)),
            Num(exact.shift.get(i))
        )?;
        for (_, c) in truncated {
            write!(w, ",{},{}", Num(c.gamma.get(i)), Num(c.shift.get(i)))?;
        }
        writeln!(w)?;
    }
    w.flush()
}

pub fn write_report(dir: &Path, json: &str) -> std::io::Result<()> {
    std::fs::write(dir.join("report.json"), json)
}

#[cfg(test)]
mod tests {
    use super::Num;

    #[test]
    fn numbers_round_trip() {
        for x in [
            0.1,
            1.0 / 3.0,
            9.338093633899414e-29,
            1e300,
            -2.5e-7,
            f64::MIN_POSITIVE,
        ] {
            let text = Num(x).to_string();
            assert_eq!(
                text.parse::<f64>().unwrap().to_bits(),
                x.to_bits(),
                "{text}"
            );
        }
    }

    #[test]
    fn negative_zero_is_plain_zero() {
        assert_eq!(Num(-0.0).to_string(), "0.0");
        assert_eq!(Num(f64::NAN).to_string(), "NaN");
    }
}
