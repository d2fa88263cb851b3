//! Text renderings of results: number formatting and the CSV schemas.

use gbirthday_core::exhaustive::{Census, SolutionList};
use gbirthday_core::recursion::{ProbTable, Probability};
use gbirthday_core::stats::{CountDistribution, DistributionKind};
use num_rational::BigRational;
use num_traits::ToPrimitive;

/// Significant digits for every float printed by the tool.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to 12 significant digits and prints the shortest decimal form of
/// the rounded value; scientific notation outside `1e-5..1e15`.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let rounded = round_sig(x);
    let exponent = rounded.abs().log10().floor() as i32;
    if (-5..15).contains(&exponent) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses")
}

pub fn fmt_probability(p: &Probability) -> String {
    match p {
        Probability::Float(x) => fmt_sig(*x),
        Probability::Exact(q) => q.to_string(),
    }
}

pub fn rational_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn csv_string<F>(header: &[&str], fill: F) -> String
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    fill(&mut w).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// Columns `b,V_b` in window order; zero counts are skipped when `sparse`.
pub fn census_csv(census: &Census, sparse: bool) -> String {
    csv_string(&["b", "V_b"], |w| {
        let rows: Box<dyn Iterator<Item = _>> =
            if sparse { Box::new(census.nonzero()) } else { Box::new(census.dense()) };
        for (b, v) in rows {
            w.write_record([b.to_string(), v.to_string()])?;
        }
        Ok(())
    })
}

/// Columns `i1..iN` with 1-based row indices.
pub fn solutions_csv(list: &SolutionList, cols: usize) -> String {
    let header: Vec<String> = (1..=cols).map(|j| format!("i{j}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    csv_string(&header, |w| {
        for s in &list.solutions {
            w.write_record(s.iter().map(|i| (i + 1).to_string()))?;
        }
        Ok(())
    })
}

/// Columns `i,j,p` over the given levels; exact tables print `num/den`.
pub fn tables_csv(tables: &[ProbTable]) -> String {
    csv_string(&["i", "j", "p"], |w| {
        for t in tables {
            for j in 0..t.len() as i64 {
                let p = t.get(j).expect("index within table");
                w.write_record([t.level().to_string(), j.to_string(), fmt_probability(&p)])?;
            }
        }
        Ok(())
    })
}

/// Columns `k,probability`; exact distributions print `num/den`.
pub fn distribution_csv(dist: &CountDistribution) -> String {
    csv_string(&["k", "probability"], |w| {
        for (k, _) in dist.weights() {
            let p = match dist.kind() {
                DistributionKind::Exact => dist.probability_exact(k).to_string(),
                DistributionKind::Empirical => fmt_sig(dist.probability(k)),
            };
            w.write_record([k.to_string(), p])?;
        }
        Ok(())
    })
}

/// Columns `n,m,R_nm`.
pub fn ratio_csv(rows: &[(u32, u32, Probability)]) -> String {
    csv_string(&["n", "m", "R_nm"], |w| {
        for (n, m, r) in rows {
            w.write_record([n.to_string(), m.to_string(), fmt_probability(r)])?;
        }
        Ok(())
    })
}

/// Columns `n,phi0_num,phi0_den,phi0`.
pub fn limit_csv(rows: &[(u32, BigRational)]) -> String {
    csv_string(&["n", "phi0_num", "phi0_den", "phi0"], |w| {
        for (n, q) in rows {
            w.write_record([n.to_string(), q.numer().to_string(), q.denom().to_string(), fmt_sig(rational_f64(q))])?;
        }
        Ok(())
    })
}

/// Columns `n,degree,coefficient` with exact coefficients.
pub fn coefficients_csv(rows: &[(u32, Vec<BigRational>)]) -> String {
    csv_string(&["n", "degree", "coefficient"], |w| {
        for (n, coeffs) in rows {
            for (d, c) in coeffs.iter().enumerate() {
                w.write_record([n.to_string(), d.to_string(), c.to_string()])?;
            }
        }
        Ok(())
    })
}

/// One point of the ratio-versus-m figure.
#[derive(Debug, Clone, PartialEq)]
pub struct FigurePoint {
    pub n: u32,
    pub m: u32,
    pub ratio: f64,
    pub limit: f64,
}

/// Columns `n,m,R_nm,phi_n0`.
pub fn figure_csv(points: &[FigurePoint]) -> String {
    csv_string(&["n", "m", "R_nm", "phi_n0"], |w| {
        for p in points {
            w.write_record([p.n.to_string(), p.m.to_string(), fmt_sig(p.ratio), fmt_sig(p.limit)])?;
        }
        Ok(())
    })
}
