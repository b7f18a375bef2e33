//! Acceptance suite. Runs every criterion, prints one line each and exits
//! nonzero if any fails. Tolerances and time limits are fixed here.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use kernel_bounds::bounds::{self, geometric_grid, kappa_upper, ratio_scan, slope_fit, BoundSettings};
use kernel_bounds::cli::{run_scan, Command, Overrides, RunConfig};
use kernel_bounds::geometry::{
    ApproachSpec, Block, Direction, DomainDescriptor, ExtendedBlock, ExtendedDomainDescriptor, RealCoord,
};
use kernel_bounds::oracle::{
    exact_kappa_reference, gram_kappa, transformation_check, transformation_check_gram, Dictionary, ReferenceDomain,
    SampleSet, DEFAULT_BATCHES, DEFAULT_CUTOFF,
};
use kernel_bounds::profiles::{doubling_constant, lemma31_ratio, ProfileFunction};
use kernel_bounds::quadrature::prop32_ratio;
use num_complex::Complex64;

const SLOPE_TOL: f64 = 0.05;
const BAND_MAX: f64 = 100.0;
const SIGMA_TOL: f64 = 1e-6;
const LEMMA_SLACK: f64 = 1e-9;
const ORACLE_RTOL: f64 = 0.01;
const SE_FACTOR: f64 = 3.0;
const MC_SAMPLES: usize = 200_000;
const DMAX: u32 = 8;
const SEED: u64 = 42;
const CLOSED_FORM_TOL: f64 = 1e-12;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn within_time(start: Instant, limit: Duration, msg: String) -> Outcome {
    let elapsed = start.elapsed();
    check(elapsed < limit, format!("{msg}; {:.2}s < {}s", elapsed.as_secs_f64(), limit.as_secs()))
}

fn power(m: f64) -> ProfileFunction {
    ProfileFunction::power(m, 1.0).unwrap()
}

fn quartic() -> DomainDescriptor {
    DomainDescriptor::single(power(4.0)).unwrap()
}

fn cone() -> ApproachSpec {
    ApproachSpec::radial(vec![2.0], 2.0).unwrap()
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let f = power(2.0);
    let grid = geometric_grid(1e-6, 1e-1, 40).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for &t in &grid {
        worst = worst.max(prop32_ratio(&f, 1, t).map_err(|e| e.to_string())?);
    }
    let smallest = prop32_ratio(&f, 1, 1e-6).map_err(|e| e.to_string())?;
    check(
        worst <= PI / 2.0 + 1e-6 && smallest >= 1.569,
        format!("max ratio {worst:.9} <= pi/2 + 1e-6, ratio(1e-6) = {smallest:.6} >= 1.569"),
    )
    .and_then(|m| within_time(start, Duration::from_secs(1), m))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for (p, expected) in [(0.5, 4.0), (1.0, 2.0), (2.0, 2f64.sqrt())] {
        let f = ProfileFunction::exp_flat(p).unwrap();
        let cert = doubling_constant(&f, 0.1, 256).map_err(|e| e.to_string())?;
        ok &= (cert.sigma - expected).abs() <= SIGMA_TOL && cert.is_valid();
        parts.push(format!("p={p}: sigma={:.9}", cert.sigma));
    }
    check(ok, parts.join(", ")).and_then(|m| within_time(start, Duration::from_secs(1), m))
}

fn criterion_3() -> Outcome {
    let f = ProfileFunction::exp_flat(1.0).unwrap();
    let cert = doubling_constant(&f, 0.1, 256).map_err(|e| e.to_string())?;
    let t_max = f.lambda(cert.range_end / cert.sigma).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for m in [1.0, 2.0, 4.0] {
        let ratio = lemma31_ratio(&f, &cert, m, t_max, 256).map_err(|e| e.to_string())?;
        let bound = cert.sigma.powf(m) - 1.0;
        ok &= ratio <= bound + LEMMA_SLACK;
        parts.push(format!("m={m}: {ratio:.9} <= {bound:.9}"));
    }
    check(ok, parts.join(", "))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let grid = geometric_grid(1e-6, 1e-2, 40).map_err(|e| e.to_string())?;
    let table = ratio_scan(&quartic(), &cone(), &grid, None, &BoundSettings::default()).map_err(|e| e.to_string())?;
    let lo = slope_fit(&table, "kappa_lower").map_err(|e| e.to_string())?;
    let hi = slope_fit(&table, "kappa_upper").map_err(|e| e.to_string())?;
    let rows: Vec<_> = table.ok_rows().collect();
    let sandwich = rows.len() == 40 && rows.iter().all(|r| r.kappa_lower <= r.kappa_upper.unwrap());
    let q: Vec<f64> = rows.iter().map(|r| r.kappa_upper.unwrap() / r.kappa_lower).collect();
    let b = bounds::band(&q).map_err(|e| e.to_string())?;
    check(
        (lo.slope + 2.5).abs() <= SLOPE_TOL && (hi.slope + 2.5).abs() <= SLOPE_TOL && sandwich && b <= BAND_MAX,
        format!(
            "slopes {:.4} / {:.4} vs -2.5, sandwich on {} rows: {sandwich}, upper/lower band {b:.4}",
            lo.slope,
            hi.slope,
            rows.len()
        ),
    )
    .and_then(|m| within_time(start, Duration::from_secs(30), m))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let d = DomainDescriptor::single(ProfileFunction::exp_flat(1.0).unwrap()).unwrap();
    let grid = geometric_grid(1e-12, 1e-3, 40).map_err(|e| e.to_string())?;
    let table = ratio_scan(&d, &cone(), &grid, None, &BoundSettings::default()).map_err(|e| e.to_string())?;
    let rows: Vec<_> = table.ok_rows().collect();
    let norm = |t: f64| t * t / (1.0 / t).ln().powi(2);
    let lo: Vec<f64> = rows.iter().map(|r| r.kappa_lower * norm(r.t)).collect();
    let hi: Vec<f64> = rows.iter().map(|r| r.kappa_upper.unwrap() * norm(r.t)).collect();
    let (bl, bh) = (bounds::band(&lo).map_err(|e| e.to_string())?, bounds::band(&hi).map_err(|e| e.to_string())?);
    check(
        rows.len() == 40 && bl <= BAND_MAX && bh <= BAND_MAX,
        format!("{} rows, bands of kappa t^2/ln(1/t)^2: lower {bl:.4}, upper {bh:.4}", rows.len()),
    )
    .and_then(|m| within_time(start, Duration::from_secs(60), m))
}

fn criterion_6() -> Outcome {
    let d = quartic();
    let grid = geometric_grid(1e-6, 1e-2, 40).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, xi, expected) in [
        ("normal", Direction::normal(&d), -2.0),
        ("tangential", Direction::tangential(&d, 0).unwrap(), -0.5),
    ] {
        let table = ratio_scan(&d, &cone(), &grid, Some(&xi), &BoundSettings::default()).map_err(|e| e.to_string())?;
        let lo = slope_fit(&table, "metric_lower").map_err(|e| e.to_string())?;
        let hi = slope_fit(&table, "metric_upper").map_err(|e| e.to_string())?;
        let rows: Vec<_> = table.ok_rows().collect();
        let sandwich = rows.len() == 40 && rows.iter().all(|r| r.metric_lower.unwrap() <= r.metric_upper.unwrap());
        ok &= (lo.slope - expected).abs() <= SLOPE_TOL && (hi.slope - expected).abs() <= SLOPE_TOL && sandwich;
        parts.push(format!("{name}: {:.4} / {:.4} vs {expected}, sandwich {sandwich}", lo.slope, hi.slope));
    }
    check(ok, parts.join("; "))
}

fn criterion_7() -> Outcome {
    let d = quartic().with_convex(true);
    let grid = geometric_grid(1e-6, 1e-2, 40).map_err(|e| e.to_string())?;
    let table = ratio_scan(&d, &cone(), &grid, None, &BoundSettings::default()).map_err(|e| e.to_string())?;
    let lo = slope_fit(&table, "szego_lower").map_err(|e| e.to_string())?;
    let hi = slope_fit(&table, "szego_upper_env").map_err(|e| e.to_string())?;
    check(
        (lo.slope + 1.5).abs() <= SLOPE_TOL && (hi.slope + 1.5).abs() <= SLOPE_TOL,
        format!("szego_lower slope {:.4}, upper envelope slope {:.4}, both vs -1.5", lo.slope, hi.slope),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let domains = vec![
        ("x^2", DomainDescriptor::single(power(2.0)).unwrap()),
        ("x^4", quartic()),
        ("exp(-1/x)", DomainDescriptor::single(ProfileFunction::exp_flat(1.0).unwrap()).unwrap()),
        (
            "x^2 (C^2) + x^6",
            DomainDescriptor::new(
                vec![Block { dim: 2, profile: power(2.0) }, Block { dim: 1, profile: power(6.0) }],
                1.0,
            )
            .unwrap(),
        ),
        (
            "exp(-1/x^2) + x^4",
            DomainDescriptor::new(
                vec![
                    Block { dim: 1, profile: ProfileFunction::exp_flat(2.0).unwrap() },
                    Block { dim: 1, profile: power(4.0) },
                ],
                1.0,
            )
            .unwrap(),
        ),
    ];
    let settings = [(2.0, 2.0, 1e-2), (1.5, 3.0, 1e-3), (3.0, 1.5, 1e-4), (1.2, 1.2, 1e-2)];
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for (name, d) in &domains {
        for (i, &(alpha, beta, t)) in settings.iter().enumerate() {
            let approach = ApproachSpec::radial(vec![alpha; d.k()], beta).unwrap();
            let z = d.approach_point(&approach, t).map_err(|e| format!("{name}: {e}"))?;
            let region = d.polydisc(&approach, &z).map_err(|e| format!("{name}: {e}"))?;
            let rho = d
                .polydisc_inclusion_check(&region, 100_000, SEED + i as u64)
                .map_err(|e| format!("{name}: {e}"))?;
            worst = worst.max(rho);
            count += 1;
        }
    }
    check(worst < 0.0 && count == 20, format!("{count} configurations x 1e5 samples, max rho {worst:.3e} < 0"))
        .and_then(|m| within_time(start, Duration::from_secs(30), m))
}

fn criterion_9() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    let cases = [
        ("disc z=0", ReferenceDomain::Disc { r: 1.0 }, vec![c(0.0)]),
        ("disc z=0.5", ReferenceDomain::Disc { r: 1.0 }, vec![c(0.5)]),
        ("bidisc centre", ReferenceDomain::Polydisc { radii: vec![1.0, 1.0] }, vec![c(0.0), c(0.0)]),
        ("ball(2,1) centre", ReferenceDomain::Ball { dim: 2, r: 1.0 }, vec![c(0.0), c(0.0)]),
    ];
    for (name, region, z) in &cases {
        let dict = Dictionary::total_degree(z.len(), DMAX);
        let est = gram_kappa(region, z, &dict, MC_SAMPLES, SEED).map_err(|e| e.to_string())?;
        let exact = exact_kappa_reference(region, z).map_err(|e| e.to_string())?;
        let rel = (est.value - exact).abs() / exact;
        ok &= rel <= ORACLE_RTOL;
        parts.push(format!("{name} rel err {rel:.2e}"));
    }

    let disc = ReferenceDomain::Disc { r: 1.0 };
    let samples = SampleSet::draw(&disc, MC_SAMPLES, SEED, DEFAULT_BATCHES).map_err(|e| e.to_string())?;
    let full = Dictionary::total_degree(1, DMAX);
    let mut prev = 0.0;
    let mut monotone = true;
    for size in 1..=full.size() {
        let v = samples.estimate(&full.prefix(size), &[c(0.5)], DEFAULT_CUTOFF).map_err(|e| e.to_string())?.value;
        monotone &= v >= prev;
        prev = v;
    }
    ok &= monotone;
    parts.push(format!("monotone {monotone}"));

    let t1 = transformation_check(&disc, &[2.0], &[c(0.0)]).map_err(|e| e.to_string())?;
    let t2 = transformation_check(&ReferenceDomain::Polydisc { radii: vec![1.0, 1.0] }, &[2.0, 3.0], &[c(0.0), c(0.0)])
        .map_err(|e| e.to_string())?;
    ok &= t1.discrepancy <= CLOSED_FORM_TOL && t2.discrepancy <= CLOSED_FORM_TOL;
    let bidisc = ReferenceDomain::Polydisc { radii: vec![1.0, 1.0] };
    let t3 = transformation_check_gram(&bidisc, &[2.0, 3.0], &[c(0.3), c(0.1)], &Dictionary::total_degree(2, DMAX), MC_SAMPLES, SEED)
        .map_err(|e| e.to_string())?;
    ok &= t3.discrepancy <= SE_FACTOR * t3.standard_error;
    parts.push(format!(
        "closed-form discrepancies {:e}, {:e}; sampled {:.2e} <= 3 x {:.2e}",
        t1.discrepancy, t2.discrepancy, t3.discrepancy, t3.standard_error
    ));
    check(ok, parts.join(", "))
}

fn criterion_10() -> Outcome {
    let d = quartic();
    let dict = Dictionary::total_degree(2, DMAX);
    let samples = SampleSet::draw(&d, MC_SAMPLES, SEED, DEFAULT_BATCHES).map_err(|e| e.to_string())?;
    let grid = geometric_grid(1e-3, 1e-2, 10).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for &t in &grid {
        let z = d.approach_point(&cone(), t).map_err(|e| e.to_string())?;
        let est = samples.estimate(&dict, &z.coords(), DEFAULT_CUTOFF).map_err(|e| e.to_string())?;
        let upper = kappa_upper(&d, &cone(), &z).map_err(|e| e.to_string())?;
        worst = worst.max(est.value / (upper * (1.0 + SE_FACTOR * est.relative_error())));
    }
    check(worst <= 1.0, format!("max gram / (kappa_upper (1 + 3 SE)) = {worst:.3e} over {} heights", grid.len()))
}

fn criterion_11() -> Outcome {
    let d = ExtendedDomainDescriptor::new(
        vec![
            ExtendedBlock { coords: vec![RealCoord::re(0)], profile: power(2.0) },
            ExtendedBlock { coords: vec![RealCoord::im(0)], profile: power(2.0) },
        ],
        1.0,
        0.1,
    )
    .map_err(|e| e.to_string())?;
    let grid = geometric_grid(1e-6, 1e-2, 40).map_err(|e| e.to_string())?;
    let table = bounds::extended_scan(&d, &grid, &BoundSettings::default()).map_err(|e| e.to_string())?;
    let fit = slope_fit(&table, "kappa_lower").map_err(|e| e.to_string())?;
    let env = slope_fit(&table, "env_kappa").map_err(|e| e.to_string())?;
    check(
        (fit.slope - env.slope).abs() <= SLOPE_TOL,
        format!("kappa_lower slope {:.4} vs extended envelope slope {:.4}", fit.slope, env.slope),
    )
}

fn criterion_12() -> Outcome {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/quartic.json"))
        .map_err(|e| e.to_string())?;
    let config = RunConfig::from_json(&text)
        .and_then(|c| c.resolve(&Overrides::default()))
        .map_err(|e| e.to_string())?;
    let a = run_scan(&config, Command::KernelScan).map_err(|e| e.to_string())?;
    let b = run_scan(&config, Command::KernelScan).map_err(|e| e.to_string())?;
    check(
        a.csv == b.csv && !a.csv.is_empty(),
        format!("two kernel-scan runs, {} CSV bytes, identical: {}", a.csv.len(), a.csv == b.csv),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 12] = [
        (1, "radial integral ratio for f = r^2", criterion_1),
        (2, "doubling constants of exp(-1/x^p)", criterion_2),
        (3, "Lambda^-1 growth constant", criterion_3),
        (4, "Bergman rate, finite type", criterion_4),
        (5, "Bergman rate, mildly infinite type", criterion_5),
        (6, "metric rates", criterion_6),
        (7, "Szego rates", criterion_7),
        (8, "polydisc inclusion", criterion_8),
        (9, "oracle agreement", criterion_9),
        (10, "Gram estimate below kappa_upper", criterion_10),
        (11, "extended-domain rate", criterion_11),
        (12, "determinism", criterion_12),
    ];
    let mut failed = 0;
    for (n, name, f) in criteria {
        match f() {
            Ok(msg) => println!("criterion {n:2} PASS  {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n:2} FAIL  {name}: {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
