//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails, except those listed in `UNATTAINABLE`,
//! which are still run at full strength and reported as FAIL.
//!
//! `TORAL_ACCEPT=3,9` restricts the run to the listed criteria.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toral_core::arith::{isqrt, jacobi_count, sum_of_squares_count};
use toral_core::construct::{concentration_check, cylinder_witness, vanish_sweep};
use toral_core::lattice::{enumerate_shell, ClusterOptions};
use toral_core::measures::{
    decay_fit, Atom, Component, MeasureModel, Patch, PeriodizedPower, SurfacePatch, TableEntry,
};
use toral_core::quadform::{assemble_gram, cluster_block_split};
use toral_core::sobolev::{cantor_bound_check, irregular_divergence_audit, pair_energy, IntervalUnion};
use toral_core::{Result, C64};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

/// Measure/shell pairs exercised by the Gram criteria, replayed by the
/// cluster-block criterion.
type Pairs = Vec<(String, MeasureModel, usize, u64)>;

fn brute_r2(n: u64) -> u64 {
    let mut c = 0;
    let r = isqrt(n);
    for a in 0..=r {
        let b2 = n - a * a;
        let b = isqrt(b2);
        if b * b == b2 {
            c += match (a == 0, b == 0) {
                (true, true) => 1,
                (true, false) | (false, true) => 2,
                (false, false) => 4,
            };
        }
    }
    c
}

fn c1_jacobi() -> Result<Outcome> {
    let start = Instant::now();
    let mut bad = Vec::new();
    for n in 1..=100_000u64 {
        if jacobi_count(n as i64)? != brute_r2(n) {
            bad.push(n);
        }
    }
    let t = start.elapsed();
    outcome(
        bad.is_empty() && t <= Duration::from_secs(60),
        format!(
            "mismatches {} (first {:?}), {:.2}s",
            bad.len(),
            bad.first(),
            t.as_secs_f64()
        ),
    )
}

fn c2_primorial() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (p, primes) in [(5u64, 1u32), (65, 2), (1105, 3), (32045, 4)] {
        let n = enumerate_shell(2, p as i64)?.len() as u64;
        let want = 4 * 2u64.pow(primes);
        ok &= n == want && brute_r2(p) == want;
        parts.push(format!("N({p})={n}"));
    }
    outcome(ok, parts.join(" "))
}

fn c3_jarnik() -> Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let out = dir.path().to_str().unwrap().to_string();
    let code = toral_core::cli::run(["toral", "jarnik", "--max", "100000", "--c", "0.1", "--out", &out]);
    let text = std::fs::read_to_string(dir.path().join("jarnik.json"))?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    let r = &v["result"];
    outcome(
        code == 0 && r["max_cluster_size"].as_u64().is_some_and(|m| m <= 2),
        format!(
            "exit {code}, shells {}, max cluster {}",
            r["shells_checked"], r["max_cluster_size"]
        ),
    )
}

fn half_dirac_half_lebesgue(d: usize) -> MeasureModel {
    MeasureModel::Mixture {
        components: vec![
            Component {
                weight: 0.5,
                measure: MeasureModel::Dirac { d, x0: vec![0.0; d] },
            },
            Component {
                weight: 0.5,
                measure: MeasureModel::Lebesgue { d },
            },
        ],
    }
}

fn c4_trivia(pairs: &mut Pairs) -> Result<Outcome> {
    let mut ok = true;
    let mut worst = 0.0f64;
    for (d, n) in [(2usize, 25u64), (2, 65), (2, 1105), (3, 9), (3, 50)] {
        let shell = enumerate_shell(d, n as i64)?;
        let leb = MeasureModel::Lebesgue { d };
        let g = assemble_gram(&shell.points, &leb)?;
        let e = (g.lambda_min() - 1.0).abs().max((g.lambda_max() - 1.0).abs());
        ok &= e <= 1e-10;
        worst = worst.max(e);
        pairs.push(("lebesgue".into(), leb, d, n));

        let dirac = MeasureModel::Dirac { d, x0: vec![0.31; d] };
        let g = assemble_gram(&shell.points, &dirac)?;
        let e = (g.lambda_max() - shell.len() as f64).abs();
        ok &= e <= 1e-8 && g.lambda_min() <= 1e-8;
        worst = worst.max(e);
        pairs.push(("dirac".into(), dirac, d, n));
    }
    let shell = enumerate_shell(2, 25)?;
    let mix = half_dirac_half_lebesgue(2);
    let g = assemble_gram(&shell.points, &mix)?;
    let e = (g.lambda_min() - 0.5).abs().max((g.lambda_max() - 6.5).abs());
    ok &= e <= 1e-8;
    worst = worst.max(e);
    pairs.push(("mixture".into(), mix, 2, 25));
    outcome(
        ok,
        format!(
            "mixture ({:.12}, {:.12}), worst error {worst:.2e}",
            g.lambda_min(),
            g.lambda_max()
        ),
    )
}

/// `|g|² / ‖g‖²` for a random trigonometric polynomial `g` on `|k|∞ ≤ 2`.
fn random_density(rng: &mut ChaCha8Rng) -> Result<MeasureModel> {
    let box_pts: Vec<(i64, i64)> = (-2..=2).flat_map(|a| (-2..=2).map(move |b| (a, b))).collect();
    let g: Vec<C64> = box_pts
        .iter()
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm: f64 = g.iter().map(|c| c.norm_sqr()).sum();
    let mut entries = Vec::new();
    for m0 in -4i64..=4 {
        for m1 in -4i64..=4 {
            let mut s = C64::new(0.0, 0.0);
            for (i, &(a, b)) in box_pts.iter().enumerate() {
                let (c, d) = (a - m0, b - m1);
                if c.abs() <= 2 && d.abs() <= 2 {
                    let j = ((c + 2) * 5 + (d + 2)) as usize;
                    s += g[i] * g[j].conj();
                }
            }
            s /= norm;
            entries.push(TableEntry {
                k: vec![m0, m1],
                re: s.re,
                im: s.im,
            });
        }
    }
    // the zero coefficient is exactly 1 up to rounding
    for e in entries.iter_mut() {
        if e.k == [0, 0] {
            e.re = 1.0;
            e.im = 0.0;
        }
    }
    let text = serde_json::json!({"type": "fourier_table", "d": 2, "entries": entries}).to_string();
    MeasureModel::from_json(&text)
}

fn table_l2(m: &MeasureModel) -> f64 {
    match m {
        MeasureModel::FourierTable(t) => t.l2_norm(),
        _ => unreachable!(),
    }
}

fn c5_zygmund(pairs: &mut Pairs) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let shells: Vec<_> = (1..=2000u64)
        .map(|n| enumerate_shell(2, n as i64))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|s| !s.is_empty())
        .collect();
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for i in 0..20 {
        let m = random_density(&mut rng)?;
        let bound = 2f64.sqrt() * table_l2(&m);
        for s in &shells {
            let g = assemble_gram(&s.points, &m)?;
            ok &= g.lambda_max() <= bound + 1e-8;
            worst = worst.max(g.lambda_max() / bound);
            if i < 2 {
                pairs.push((format!("density{i}"), m.clone(), 2, s.n));
            }
        }
    }
    outcome(
        ok,
        format!(
            "20 densities x {} shells, worst lambda_max / bound {worst:.4}",
            shells.len()
        ),
    )
}

fn catalogue() -> Result<Vec<(String, MeasureModel, usize)>> {
    let circle = MeasureModel::Circle {
        x0: vec![0.5, 0.5],
        radius: 0.2,
    };
    let sphere = MeasureModel::Sphere {
        x0: vec![0.5; 3],
        radius: 0.25,
    };
    let cylinder = MeasureModel::HyperplaneCylinder {
        d: 3,
        vanishing: vec![1, 2],
    };
    let atomic = MeasureModel::Atomic {
        d: 2,
        atoms: vec![
            Atom {
                weight: 0.5,
                point: vec![0.1, 0.2],
            },
            Atom {
                weight: 0.3,
                point: vec![0.7, 0.4],
            },
            Atom {
                weight: 0.2,
                point: vec![0.33, 0.9],
            },
        ],
    };
    let strip = IntervalUnion::new((0.0, 1.0), vec![(0.1, 0.35), (0.6, 0.7)])?;
    let interval = MeasureModel::IntervalIndicator {
        factors: vec![strip.clone(), strip],
    };
    let power = MeasureModel::PeriodizedPower(PeriodizedPower::new(3, 0.5)?);
    let patch = Patch::line(vec![0.0; 3], vec![0.41, 0.15])?;
    let surface = MeasureModel::SurfacePatch(SurfacePatch::new(patch, 0.05)?);
    let mix3 = MeasureModel::Mixture {
        components: vec![
            Component {
                weight: 0.5,
                measure: sphere.clone(),
            },
            Component {
                weight: 0.5,
                measure: cylinder.clone(),
            },
        ],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    Ok(vec![
        ("lebesgue".into(), MeasureModel::Lebesgue { d: 2 }, 2),
        (
            "dirac".into(),
            MeasureModel::Dirac {
                d: 2,
                x0: vec![0.25, 0.6],
            },
            2,
        ),
        ("atomic".into(), atomic, 2),
        ("fourier_table".into(), random_density(&mut rng)?, 2),
        ("circle".into(), circle, 2),
        ("interval_indicator".into(), interval, 2),
        ("mixture".into(), half_dirac_half_lebesgue(2), 2),
        ("lebesgue".into(), MeasureModel::Lebesgue { d: 3 }, 3),
        (
            "dirac".into(),
            MeasureModel::Dirac {
                d: 3,
                x0: vec![0.1, 0.2, 0.3],
            },
            3,
        ),
        ("sphere".into(), sphere, 3),
        ("hyperplane_cylinder".into(), cylinder, 3),
        ("periodized_power".into(), power, 3),
        ("surface_patch".into(), surface, 3),
        ("mixture".into(), mix3, 3),
    ])
}

fn c6_bochner(pairs: &mut Pairs) -> Result<Outcome> {
    let mut ok = true;
    let mut worst = f64::INFINITY;
    let mut tested = 0;
    let mut variants = BTreeSet::new();
    for (name, m, d) in catalogue()? {
        let ns: &[u64] = if d == 2 {
            &[25, 65, 325, 1105]
        } else {
            &[9, 26, 50, 101]
        };
        for &n in ns {
            let g = assemble_gram(&enumerate_shell(d, n as i64)?.points, &m)?;
            ok &= g.lambda_min() >= -1e-8;
            worst = worst.min(g.lambda_min());
            tested += 1;
        }
        variants.insert(name.clone());
        for &n in ns {
            pairs.push((name.clone(), m.clone(), d, n));
        }
    }
    // earlier criteria's pairs as well
    for (_, m, d, n) in pairs.iter().filter(|p| p.0.starts_with("density")) {
        let g = assemble_gram(&enumerate_shell(*d, *n as i64)?.points, m)?;
        ok &= g.lambda_min() >= -1e-8;
        worst = worst.min(g.lambda_min());
        tested += 1;
    }
    outcome(
        ok,
        format!(
            "{} variants, {tested} pairs, min lambda_min {worst:.3e}",
            variants.len()
        ),
    )
}

fn c7_concentration() -> Result<Outcome> {
    let start = Instant::now();
    let mut ok = true;
    let mut shells = 0;
    let mut worst = f64::INFINITY;
    for d in [2usize, 3] {
        for n in 1..=10_000i64 {
            let s = enumerate_shell(d, n)?;
            if s.is_empty() {
                continue;
            }
            let r = concentration_check(&s, &vec![0.0; d], 1.0 / 6.0, 1000, 7)?;
            ok &= r.pass;
            worst = worst.min(r.min_ratio);
            shells += 1;
        }
    }
    outcome(
        ok,
        format!(
            "{shells} shells, min ratio {worst:.4}, {:.1}s",
            start.elapsed().as_secs_f64()
        ),
    )
}

fn c8_cylinder() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [25u64, 65, 1105] {
        let r = cylinder_witness(n, 3)?;
        let want = sum_of_squares_count(2, n as i64)?.count as f64;
        let rel = (r.ratio - want).abs() / want;
        ok &= rel <= 1e-8;
        parts.push(format!("{n}: {:.10} vs {want}", r.ratio));
    }
    outcome(ok, parts.join(", "))
}

fn c9_nullspace() -> Result<Outcome> {
    let start = Instant::now();
    let patch = Patch::line(vec![0.0; 3], vec![0.41, 0.15])?;
    let s = vanish_sweep(&patch, 0.05, 0.2, &[20.0, 30.0, 40.0, 50.0, 60.0])?;
    let t = start.elapsed();
    let ratios: Vec<String> = s.rows.iter().map(|r| format!("{:.1e}", r.ratio)).collect();
    outcome(
        s.max_residual <= 1e-8 && s.final_ratio <= 1e-3 && s.decreasing && t <= Duration::from_secs(600),
        format!(
            "max residual {:.1e}, ratios [{}], {:.1}s",
            s.max_residual,
            ratios.join(", "),
            t.as_secs_f64()
        ),
    )
}

fn c10_sandwich(pairs: &Pairs) -> Result<Outcome> {
    let mut ok = true;
    let mut failures = Vec::new();
    for (name, m, d, n) in pairs {
        let opts = ClusterOptions {
            c: 1.0,
            exponent: None,
            geometry: false,
        };
        let b = cluster_block_split(*n, *d, m, opts)?;
        if !b.sandwich_holds {
            ok = false;
            failures.push(format!("{name}/d{d}/n{n}"));
        }
    }
    outcome(ok, format!("{} pairs, failures {:?}", pairs.len(), failures))
}

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    let w = 2.0 / ((1.0 - x * x) * dp * dp);
                    return (x, w);
                }
            }
        })
        .collect()
}

/// Breakpoints of `[lo, hi]` refined geometrically toward `toward`
/// (one of the endpoints) down to width `finest`.
fn graded(lo: f64, hi: f64, toward_hi: bool, finest: f64) -> Vec<f64> {
    let len = hi - lo;
    let mut w = len;
    let mut dists = vec![len];
    while w > finest {
        w *= 0.5;
        dists.push(w);
    }
    dists.push(0.0);
    let mut pts: Vec<f64> = dists
        .iter()
        .map(|&t| if toward_hi { hi - t } else { lo + t })
        .collect();
    pts.sort_by(f64::total_cmp);
    pts
}

/// Tensor Gauss-Legendre over `I × J`, panels graded toward the near corner.
fn pair_energy_oracle((a, b): (f64, f64), (c, d): (f64, f64), eps: f64, gl: &[(f64, f64)]) -> f64 {
    let gap = c - b;
    let xs = graded(a, b, true, gap);
    let ys = graded(c, d, false, gap);
    let mut total = 0.0;
    for px in xs.windows(2) {
        let (hx, mx) = (0.5 * (px[1] - px[0]), 0.5 * (px[1] + px[0]));
        for py in ys.windows(2) {
            let (hy, my) = (0.5 * (py[1] - py[0]), 0.5 * (py[1] + py[0]));
            let mut s = 0.0;
            for &(u, wu) in gl {
                let x = mx + hx * u;
                for &(v, wv) in gl {
                    let y = my + hy * v;
                    s += wu * wv * (y - x).powf(-1.0 - eps);
                }
            }
            total += s * hx * hy;
        }
    }
    total
}

fn c11_pair_energy() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let gl = gauss_legendre(20);
    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 100 {
        let eps = rng.gen_range(0.05..0.95);
        let mut xs: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..1.0)).collect();
        xs.sort_by(f64::total_cmp);
        let (a, b, c, d) = (xs[0], xs[1], xs[2], xs[3]);
        if c - b < 1e-4 || b - a < 1e-4 || d - c < 1e-4 {
            continue;
        }
        let closed = pair_energy((a, b), (c, d), eps)?;
        let q = pair_energy_oracle((a, b), (c, d), eps, &gl);
        worst = worst.max((q - closed).abs() / closed);
        count += 1;
    }
    let (h, eps) = (0.3f64, 0.4f64);
    let single = pair_energy((0.0, h), (h, 1.0), eps)?;
    let expected = (h.powf(1.0 - eps) + (1.0 - h).powf(1.0 - eps) - 1.0) / (eps * (1.0 - eps));
    let single_err = (single - expected).abs();
    outcome(
        worst <= 1e-6 && single_err <= 1e-12,
        format!("{count} pairs, worst relative error {worst:.2e}, single interval {single_err:.1e}"),
    )
}

fn c12_cantor() -> Result<Outcome> {
    let r = cantor_bound_check(0.25, 0.3, 12)?;
    let min_shrink = r.min_shrink.unwrap_or(f64::NAN);
    let shrinks: Vec<String> = r
        .rows
        .iter()
        .filter_map(|x| x.shrink)
        .map(|s| format!("{s:.3}"))
        .collect();
    outcome(
        r.bound_holds && min_shrink >= 1.5,
        format!(
            "bound holds {}, shrink factors [{}]",
            r.bound_holds,
            shrinks.join(", ")
        ),
    )
}

fn c13_irregular() -> Result<Outcome> {
    let r = irregular_divergence_audit(100_000, 0.5)?;
    let growth = r.growth_ratio.unwrap_or(f64::NAN);
    outcome(
        growth >= 2.0 && r.relative_gap <= 1e-9,
        format!("growth {growth:.4}, closed-form gap {:.1e}", r.relative_gap),
    )
}

fn c14_decay() -> Result<Outcome> {
    let circle = MeasureModel::Circle {
        x0: vec![0.0, 0.0],
        radius: 0.2,
    };
    let a = decay_fit(&circle, 512)?.exponent;
    let power = MeasureModel::PeriodizedPower(PeriodizedPower::new(3, 0.5)?);
    let b = decay_fit(&power, 512)?.exponent;
    outcome(
        (0.4..=0.6).contains(&a) && (0.35..=0.65).contains(&b),
        format!("circle {a:.4}, periodized power {b:.4}"),
    )
}

/// Criteria that cannot hold as stated, with the reason.
const UNATTAINABLE: &[(u32, &str)] = &[(
    12,
    "per-depth shrink tends to 1/(2 alpha^(1-eps)) = 1.32 < 1.5 for alpha = 1/4, eps = 0.3",
)];

fn main() {
    let only: Option<BTreeSet<u32>> = std::env::var("TORAL_ACCEPT")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let want = |i: u32| only.as_ref().is_none_or(|s| s.contains(&i));
    let mut pairs: Pairs = Vec::new();
    let names = [
        "jacobi identity",
        "primorial shells",
        "jarnik audit",
        "gram trivia",
        "zygmund bound",
        "bochner psd",
        "concentration",
        "cylinder witness",
        "null-space counterexample",
        "cluster-block sandwich",
        "interval pair closed form",
        "fat cantor convergence",
        "irregular divergence",
        "decay-fit sanity",
    ];
    let mut failed = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let id = i as u32 + 1;
        // the sandwich criterion replays the pairs gathered by 4 to 6
        if !want(id) && !(want(10) && (4..=6).contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let res = match id {
            1 => c1_jacobi(),
            2 => c2_primorial(),
            3 => c3_jarnik(),
            4 => c4_trivia(&mut pairs),
            5 => c5_zygmund(&mut pairs),
            6 => c6_bochner(&mut pairs),
            7 => c7_concentration(),
            8 => c8_cylinder(),
            9 => c9_nullspace(),
            10 => c10_sandwich(&pairs),
            11 => c11_pair_energy(),
            12 => c12_cantor(),
            13 => c13_irregular(),
            _ => c14_decay(),
        };
        if !want(id) {
            continue;
        }
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match res {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        println!(
            "{} {id:>2} {name}: {detail} [{secs:.1}s]",
            if pass { "PASS" } else { "FAIL" }
        );
        match UNATTAINABLE.iter().find(|u| u.0 == id) {
            Some((_, why)) if !pass => println!("        expected failure: {why}"),
            Some(_) => println!("        note: listed as unattainable but passed"),
            None if !pass => failed.push(id),
            None => {}
        }
    }
    if !failed.is_empty() {
        println!("unexpected failures: {failed:?}");
        std::process::exit(1);
    }
}
