//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero if any criterion fails. Tolerances and runtime limits are pinned
//! below.

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use gbirthday::parallel::monte_carlo_parallel;
use gbirthday_core::exhaustive::census;
use gbirthday_core::instance::sample_instance;
use gbirthday_core::limitpoly::LimitPolynomials;
use gbirthday_core::recursion::{lambda_mean, mu_mean, ratio, Mode};
use gbirthday_core::stats::{
    chen_stein_bound_v0, chen_stein_bound_w, exact_distribution, l1_poisson, MonteCarloConfig, Statistic,
    DEFAULT_ENUMERATION_BUDGET,
};
use gbirthday_core::wagner::count_wagner;
use gbirthday_core::{Residue, RingContext};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Pow, ToPrimitive};

const QUADRATURE_TOLERANCE: f64 = 1e-10;
const CONVERGENCE_FACTOR: f64 = 0.1;
const MACHINE_TOLERANCE: f64 = 4.0 * f64::EPSILON;
const ORACLE_INSTANCES: u64 = 200;
const ORACLE_MAX_TUPLES: u64 = 1_000_000;
const MC_REPLICATES: u64 = 100_000;
const MC_STANDARD_ERRORS: f64 = 5.0;

fn rational(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn criterion_1() -> Result<(), String> {
    for m in 2..=14 {
        let r = ratio(1, m, Mode::Float).map_err(|e| e.to_string())?.to_f64();
        if r != 1.0 {
            return Err(format!("ratio(1,{m}) = {r}"));
        }
    }
    for m in 2..=10u32 {
        let r = ratio(2, m, Mode::Exact).map_err(|e| e.to_string())?;
        let expected = rational((1 << (m - 1)) + 1, (1 << m) + 1);
        if r.exact() != Some(&expected) {
            return Err(format!("ratio(2,{m}) = {r:?}, expected {expected}"));
        }
    }
    Ok(())
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f((a + b) / 2.0) + f(b))
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let mid = (a + b) / 2.0;
    let (l, r) = (simpson(f, a, mid), simpson(f, mid, b));
    if depth == 0 || (l + r - whole).abs() <= 15.0 * tol {
        return l + r + (l + r - whole) / 15.0;
    }
    adaptive(f, a, mid, l, tol / 2.0, depth - 1) + adaptive(f, mid, b, r, tol / 2.0, depth - 1)
}

fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    adaptive(f, a, b, simpson(f, a, b), 1e-13, 40)
}

/// The limit-polynomial integral recursion, evaluated purely numerically.
fn phi_quadrature(n: u32, x: f64) -> f64 {
    if n == 1 {
        return 1.0;
    }
    let end = 0.5f64.powi(n as i32);
    let direct = integrate(&|u| phi_quadrature(n - 1, u) * phi_quadrature(n - 1, x - u), 0.0, x);
    let reflected = integrate(&|u| phi_quadrature(n - 1, u) * phi_quadrature(n - 1, u - x), x, end);
    direct + 2.0 * reflected
}

fn criterion_2() -> Result<(), String> {
    let mut table = LimitPolynomials::default();
    for (n, expected) in [(1, rational(1, 1)), (2, rational(1, 2)), (3, rational(37, 768))] {
        let exact = table.phi_at_zero(n).map_err(|e| e.to_string())?;
        if exact != expected {
            return Err(format!("phi_{n}(0) = {exact}, expected {expected}"));
        }
        let numeric = phi_quadrature(n, 0.0);
        let diff = (exact.to_f64().unwrap() - numeric).abs();
        if diff > QUADRATURE_TOLERANCE {
            return Err(format!("phi_{n}(0): quadrature {numeric} differs by {diff}"));
        }
    }
    Ok(())
}

fn criterion_3() -> Result<(), String> {
    let mut table = LimitPolynomials::default();
    for n in 2..=4 {
        let limit = table.phi_at_zero(n).map_err(|e| e.to_string())?.to_f64().unwrap();
        let err = |m| ratio(n, m, Mode::Float).map(|r| (r.to_f64() - limit).abs()).map_err(|e| e.to_string());
        let (early, late) = (err(n + 2)?, err(14)?);
        if late > CONVERGENCE_FACTOR * early {
            return Err(format!("n={n}: error {late} at m=14 vs {early} at m={}", n + 2));
        }
    }
    for m in 2..=14u32 {
        let r = ratio(2, m, Mode::Float).map_err(|e| e.to_string())?.to_f64();
        let closed = ((1u64 << (m - 1)) + 1) as f64 / ((1u64 << m) + 1) as f64;
        if (r - closed).abs() > MACHINE_TOLERANCE * closed {
            return Err(format!("n=2 m={m}: ratio {r} vs closed form {closed}"));
        }
    }
    for m in 2..=10u32 {
        let r = ratio(2, m, Mode::Exact).map_err(|e| e.to_string())?;
        let error = r.exact().unwrap() - rational(1, 2);
        if error != rational(1, 2 * ((1 << m) + 1)) {
            return Err(format!("n=2 m={m}: exact error {error}"));
        }
    }
    Ok(())
}

fn criterion_4() -> Result<(), String> {
    let modulus: BigUint = BigUint::from(10u32).pow(45u32);
    let mu = mu_mean(1000, 16, &modulus).map_err(|e| e.to_string())?;
    if mu != 1000.0 {
        return Err(format!("mu = {mu}"));
    }
    let phi4 = LimitPolynomials::default().phi_at_zero(4).map_err(|e| e.to_string())?;
    if phi4 >= rational(1, 1000) {
        return Err(format!("phi_4(0) = {phi4}"));
    }
    Ok(())
}

/// Wagner's value of one candidate, straight from the definition:
/// `None` is termination.
fn wagner_value(x: &[i64], modulus: i64, m: u32, level: u32) -> Option<i64> {
    let reduce = |v: i64| {
        let r = v.rem_euclid(modulus);
        if 2 * r > modulus {
            r - modulus
        } else {
            r
        }
    };
    if x.len() == 1 {
        return Some(x[0]);
    }
    let half = x.len() / 2;
    let a = wagner_value(&x[..half], modulus, m, level - 1)?;
    let b = wagner_value(&x[half..], modulus, m, level - 1)?;
    let s = reduce(a + b);
    let width = if level == m { 0 } else { 1i64 << (m - level - 1) };
    (s.abs() <= width).then_some(s)
}

fn criterion_5() -> Result<(), String> {
    let shapes: [(usize, usize, u64); 10] = [
        (2, 2, 3),
        (3, 4, 9),
        (4, 4, 17),
        (10, 4, 33),
        (5, 8, 17),
        (3, 8, 9),
        (31, 4, 65),
        (6, 5, 11),
        (100, 3, 7),
        (2, 16, 17),
    ];
    for seed in 0..ORACLE_INSTANCES {
        let (rows, cols, modulus) = shapes[(seed % shapes.len() as u64) as usize];
        if (rows as u64).pow(cols as u32) > ORACLE_MAX_TUPLES {
            return Err(format!("shape {rows}x{cols} exceeds the tuple cap"));
        }
        let ring = RingContext::new(modulus).map_err(|e| e.to_string())?;
        let inst = sample_instance(rows, cols, ring, seed).map_err(|e| e.to_string())?;
        let values: Vec<i64> = inst.entries().iter().map(|r| r.value()).collect();
        let mut by_residue = vec![0u64; modulus as usize];
        let mut wagner = 0u64;
        let dyadic = ring.dyadic_exponent().filter(|&m| cols.is_power_of_two() && cols.trailing_zeros() <= m);
        let mut index = vec![0usize; cols];
        let mut picked = vec![0i64; cols];
        loop {
            for (c, &i) in index.iter().enumerate() {
                picked[c] = values[i * cols + c];
            }
            let sum = picked.iter().sum::<i64>().rem_euclid(modulus as i64);
            by_residue[sum as usize] += 1;
            if let Some(m) = dyadic {
                wagner += (wagner_value(&picked, modulus as i64, m, cols.trailing_zeros()) == Some(0)) as u64;
            }
            let mut c = 0;
            while c < cols {
                index[c] += 1;
                if index[c] < rows {
                    break;
                }
                index[c] = 0;
                c += 1;
            }
            if c == cols {
                break;
            }
        }
        let c = census(&inst).map_err(|e| e.to_string())?;
        for b in ring.residues() {
            let want = by_residue[b.value().rem_euclid(modulus as i64) as usize] as u128;
            if c.count(b) != want {
                return Err(format!("seed {seed}: V_{} = {} vs brute force {want}", b.value(), c.count(b)));
            }
        }
        if c.total() != (rows as u128).pow(cols as u32) {
            return Err(format!("seed {seed}: census total {}", c.total()));
        }
        if dyadic.is_some() {
            let w = count_wagner(&inst).map_err(|e| e.to_string())?;
            if w != wagner as u128 {
                return Err(format!("seed {seed}: W = {w} vs brute force {wagner}"));
            }
            if w > c.count(Residue::ZERO) {
                return Err(format!("seed {seed}: W = {w} > V0"));
            }
        }
    }
    Ok(())
}

fn criterion_6() -> Result<(), String> {
    let ring = RingContext::dyadic(3).map_err(|e| e.to_string())?;
    let expected_v0 = mu_mean(4, 4, &BigUint::from(9u32)).map_err(|e| e.to_string())?;
    let expected_w = lambda_mean(4, 2, 3, Mode::Exact).map_err(|e| e.to_string())?;
    for (statistic, expected, seed) in [(Statistic::V0, expected_v0, 6001), (Statistic::W, expected_w, 6002)] {
        let config = MonteCarloConfig { rows: 4, cols: 4, ring, statistic, replicates: MC_REPLICATES, seed };
        let mc = monte_carlo_parallel(&config).map_err(|e| e.to_string())?;
        let z = (mc.summary.mean - expected) / mc.summary.std_error;
        if z.abs() > MC_STANDARD_ERRORS {
            return Err(format!("{statistic:?}: mean {} vs {expected}, z = {z:.2}", mc.summary.mean));
        }
    }
    Ok(())
}

fn criterion_7() -> Result<(), String> {
    for (rows, cols, modulus) in [(2usize, 2usize, 3u64), (2, 2, 5), (2, 3, 3), (3, 2, 3)] {
        let dist = exact_distribution(rows, cols, modulus, Statistic::V0, DEFAULT_ENUMERATION_BUDGET)
            .map_err(|e| e.to_string())?;
        let mu = mu_mean(rows as u64, cols as u32, &BigUint::from(modulus)).map_err(|e| e.to_string())?;
        let l1 = l1_poisson(&dist, mu).map_err(|e| e.to_string())?;
        let bound =
            chen_stein_bound_v0(rows as u64, cols as u32, &BigUint::from(modulus)).map_err(|e| e.to_string())?;
        if l1 > bound {
            return Err(format!("({rows},{cols},{modulus}): L1 {l1} > bound {bound}"));
        }
    }
    Ok(())
}

fn criterion_8() -> Result<(), String> {
    let dist = exact_distribution(2, 4, 9, Statistic::W, DEFAULT_ENUMERATION_BUDGET).map_err(|e| e.to_string())?;
    if dist.total() != 9u128.pow(8) {
        return Err(format!("enumerated {} matrices", dist.total()));
    }
    let lambda = lambda_mean(2, 2, 3, Mode::Exact).map_err(|e| e.to_string())?;
    let lambda_exact = rational(16, 1) * ratio(2, 3, Mode::Exact).unwrap().exact().unwrap() / rational(9, 1);
    if dist.mean_exact() != lambda_exact {
        return Err(format!("mean {} vs lambda {lambda_exact}", dist.mean_exact()));
    }
    let l1 = l1_poisson(&dist, lambda).map_err(|e| e.to_string())?;
    let bound = chen_stein_bound_w(2, 2, 3).map_err(|e| e.to_string())?;
    if l1 > bound {
        return Err(format!("L1 {l1} > bound {bound}"));
    }
    Ok(())
}

fn run_tool(dir: &Path, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_gbirthday"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn snapshot(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| !p.to_string_lossy().ends_with(".manifest.json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    Ok(files)
}

fn clear_outputs(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<(), String> {
    for (name, _) in files {
        if name != "a.json" {
            std::fs::remove_file(dir.join(name)).map_err(|e| e.to_string())?;
        }
    }
    Ok(())
}

fn criterion_9() -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = dir.path();
    run_tool(dir, &["gen", "--L", "6", "--N", "4", "--m", "3", "--seed", "42", "--out", "a.json"])?;
    let commands: Vec<Vec<&str>> = vec![
        vec!["gen", "--L", "6", "--N", "4", "--m", "3", "--seed", "42", "--out", "b.json"],
        vec!["census", "--in", "a.json", "--out", "census.csv"],
        vec!["wagner", "--in", "a.json", "--list", "--cap", "5", "--out", "wagner.csv"],
        vec!["ratio", "--n", "3", "--m", "4", "--m-max", "8", "--exact", "--out", "ratio.csv"],
        vec!["limit", "--n", "1,2,3,4", "--out", "limit.csv", "--coeffs-out", "coeffs.csv"],
        vec!["table", "--m", "6", "--levels", "3", "--exact", "--out", "table.csv"],
        vec!["figure2", "--n", "2,3,4", "--m-max", "14", "--out-csv", "fig.csv", "--out-svg", "fig.svg"],
        vec!["mc", "--L", "4", "--N", "4", "--m", "3", "--stat", "w", "--K", "20000", "--seed", "9", "--out", "mc.csv"],
        vec!["bounds", "--L", "4", "--N", "4", "--m", "3", "--out", "bounds.txt"],
        vec!["exact-dist", "--L", "2", "--N", "3", "--M", "3", "--stat", "v0", "--out", "exact.csv"],
    ];
    for (k, args) in commands.iter().enumerate() {
        let manifest = format!("run{k}.manifest.json");
        let mut first = vec!["--threads", "1", "--manifest", &manifest];
        first.extend(args);
        let stdout = run_tool(dir, &first)?;
        let before = snapshot(dir)?;
        clear_outputs(dir, &before)?;
        let replayed = run_tool(dir, &["replay", &manifest, "--threads", "4"])?;
        if replayed != stdout {
            return Err(format!("{}: stdout differs on replay", args[0]));
        }
        if snapshot(dir)? != before {
            return Err(format!("{}: files differ on replay", args[0]));
        }
        run_tool(dir, &["replay", &manifest, "--verify", "--threads", "3"])?;
        clear_outputs(dir, &before)?;
    }
    Ok(())
}

type Criterion = (u32, &'static str, fn() -> Result<(), String>, Duration);

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "exact ratio identities", criterion_1, Duration::from_secs(1)),
        (2, "limit constants vs adaptive quadrature", criterion_2, Duration::from_secs(1)),
        (3, "ratio convergence to the limits", criterion_3, Duration::from_secs(60)),
        (4, "worked example mu = 1000 and phi_4(0) < 1e-3", criterion_4, Duration::from_secs(1)),
        (5, "census and Wagner count vs brute force", criterion_5, Duration::from_secs(300)),
        (6, "Monte Carlo means within 5 standard errors", criterion_6, Duration::from_secs(120)),
        (7, "exact V0 distributions within the Chen-Stein bound", criterion_7, Duration::from_secs(60)),
        (8, "exact W distribution within the Chen-Stein bound", criterion_8, Duration::from_secs(1800)),
        (9, "manifest replay is byte-identical across thread counts", criterion_9, Duration::from_secs(600)),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, check, limit) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|()| {
            if elapsed <= limit {
                Ok(())
            } else {
                Err(format!("took {elapsed:.2?}, limit {limit:?}"))
            }
        });
        match outcome {
            Ok(()) => println!("criterion {id}: PASS  {name} ({elapsed:.2?})"),
            Err(why) => {
                failed += 1;
                println!("criterion {id}: FAIL  {name} ({elapsed:.2?}): {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 9 acceptance criteria passed");
}
