//! `toral` command-line front end.
//!
//! Every command writes `<out>/<command>.csv` and `<out>/<command>.json`.
//! Exit codes: 0 success, 1 audit failure, 2 usage or input error, 3 numeric
//! non-convergence.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::arith::{jacobi_count, rich_shell_near, sum_of_squares_count};
use crate::construct::{
    amatrix, bourgain, concentration_check, cylinder_witness, decay_audit, frostman_audit,
    nullspace_eigenfunction, vanish_sweep,
};
use crate::lattice::{
    cluster_decompose_with, enumerate_shell, enumerate_shell_capped, jarnik_audit, ClusterOptions,
    DEFAULT_POINT_CAP,
};
use crate::measures::{decay_fit, sup_offzero, MeasureModel, Patch};
use crate::quadform::{assemble_gram_capped, cluster_block_split, constants_sweep_with, SweepConfig};
use crate::report::{fmt_f64, write_reports, Csv, RunConfig};
use crate::sobolev::{cantor_bound_check, irregular_divergence_audit};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_AUDIT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "toral",
    version,
    about = "Trace and observability constants for toral eigenfunctions"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone)]
struct Out {
    /// Report directory.
    #[arg(long, default_value = "toral-out")]
    out: PathBuf,
}

/// `n` or `a..b` (inclusive).
#[derive(Clone, Debug)]
pub struct NRange(pub Vec<u64>, pub String);

fn parse_range(s: &str) -> std::result::Result<NRange, String> {
    let bad = || format!("expected an integer or a..b, got {s:?}");
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(format!("empty range {s:?}"));
        }
        Ok(NRange((a..=b).collect(), s.to_string()))
    } else {
        let n: u64 = s.trim().parse().map_err(|_| bad())?;
        Ok(NRange(vec![n], s.to_string()))
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate one lattice shell.
    Shell {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        cap: Option<u64>,
        #[command(flatten)]
        out: Out,
    },
    /// Representation counts, optionally checked against Jacobi's formula.
    Counts {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        max: u64,
        #[arg(long)]
        check_jacobi: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Cluster decomposition of one shell.
    Clusters {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Separation exponent; defaults to 2/(d+1)!.
        #[arg(long)]
        exponent: Option<f64>,
        #[command(flatten)]
        out: Out,
    },
    /// At most two points per cluster at threshold c·λ^{1/3} in d = 2.
    Jarnik {
        #[arg(long)]
        max: u64,
        #[arg(long, default_value_t = 0.1)]
        c: f64,
        #[command(flatten)]
        out: Out,
    },
    /// Gram matrix spectrum for one shell.
    Gram {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value_t = crate::quadform::DEFAULT_GRAM_CAP)]
        cap: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Per-shell extremal eigenvalues over a range of n.
    Sweep {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_parser = parse_range)]
        n: NRange,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value_t = crate::quadform::DEFAULT_GRAM_CAP)]
        cap: usize,
        /// Fraction of the n range below the semiclassical cut.
        #[arg(long, default_value_t = 0.5)]
        semiclassical_cut: f64,
        #[command(flatten)]
        out: Out,
    },
    /// Cluster-block split of the Gram matrix with the cross-term bound.
    Blocks {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_parser = parse_range)]
        n: NRange,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        exponent: Option<f64>,
        #[command(flatten)]
        out: Out,
    },
    /// Concentration of Bourgain eigenfunctions near x0.
    Bourgain {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_parser = parse_range)]
        n: NRange,
        /// Comma-separated point; defaults to the origin.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        x0: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.0 / 6.0)]
        c0: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also dump the coefficients of the last shell.
        #[arg(long)]
        dump: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Ball mass versus the trace constant along Bourgain functions.
    Frostman {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_parser = parse_range)]
        n: NRange,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        x0: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.0 / 6.0)]
        c0: f64,
        #[command(flatten)]
        out: Out,
    },
    /// Eigenfunctions concentrating on {x1 = x2 = 0}.
    Cylinder {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, value_parser = parse_range)]
        n: NRange,
        #[command(flatten)]
        out: Out,
    },
    /// Kernel eigenfunction of the oscillatory system on a curve patch.
    Nullspace {
        #[arg(long)]
        patch: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        eta: f64,
        /// Shell n; if absent, chosen by the richest shell near --radius.
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        radius: Option<f64>,
        #[command(flatten)]
        out: Out,
    },
    /// Patch mass of kernel eigenfunctions over growing λ.
    Vanish {
        #[arg(long)]
        patch: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        eta: f64,
        /// Comma-separated target radii.
        #[arg(long, value_delimiter = ',', default_value = "20,30,40,50,60")]
        radii: Vec<f64>,
        #[command(flatten)]
        out: Out,
    },
    /// Fat Cantor seminorm partial sums against the geometric bound.
    Cantor {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        depth: u32,
        #[command(flatten)]
        out: Out,
    },
    /// Divergence of the seminorm of the irregular interval set.
    Irregular {
        /// Largest interval index N.
        #[arg(long)]
        n: u64,
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        out: Out,
    },
    /// Off-zero supremum and dyadic decay fit of a measure's coefficients.
    MeasureProbe {
        #[arg(long)]
        measure: PathBuf,
        /// Box size for the off-zero supremum.
        #[arg(long, default_value_t = 8)]
        k_max: i64,
        /// Largest |k| for the decay fit.
        #[arg(long, default_value_t = 64)]
        decay_k: i64,
        #[command(flatten)]
        out: Out,
    },
}

struct Outcome {
    cfg: RunConfig,
    csv: Csv,
    body: Value,
    pass: bool,
    numeric_failure: bool,
}

fn load_measure(path: &Path, cfg: &mut RunConfig) -> Result<MeasureModel> {
    let text = fs::read_to_string(path)?;
    let m = MeasureModel::from_json(&text)?;
    cfg.measure_path = Some(path.display().to_string());
    cfg.measure_echo = Some(text);
    Ok(m)
}

fn load_patch(path: &Path, cfg: &mut RunConfig) -> Result<Patch> {
    let text = fs::read_to_string(path)?;
    let p: Patch = serde_json::from_str(&text)?;
    p.validate()?;
    cfg.patch_path = Some(path.display().to_string());
    cfg.patch_echo = Some(text);
    Ok(p)
}

fn check_dim_point(x0: Option<Vec<f64>>, d: usize) -> Result<Vec<f64>> {
    let x = x0.unwrap_or_else(|| vec![0.0; d]);
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    Ok(x)
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn execute(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Shell { dim, n, cap, out } => {
            let mut cfg = RunConfig::new("shell", &out.out);
            cfg.dim = Some(dim);
            cfg.n = Some(n.to_string());
            cfg.cap = cap.map(|c| c as usize);
            let shell = enumerate_shell_capped(dim, n as i64, cap.unwrap_or(DEFAULT_POINT_CAP))?;
            let header: Vec<String> = (1..=dim).map(|i| format!("k{i}")).collect();
            let mut csv = Csv::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
            for p in &shell.points {
                csv.row(&p.iter().map(|x| x.to_string()).collect::<Vec<_>>());
            }
            let body = json!({"d": dim, "n": n, "count": shell.len(), "lambda": shell.lambda()});
            Ok(Outcome {
                cfg,
                csv,
                body,
                pass: true,
                numeric_failure: false,
            })
        }
        Command::Counts {
            dim,
            max,
            check_jacobi,
            out,
        } => {
            let mut cfg = RunConfig::new("counts", &out.out);
            cfg.dim = Some(dim);
            cfg.n = Some(format!("0..{max}"));
            cfg.extra = json!({"check_jacobi": check_jacobi});
            if check_jacobi && dim != 2 {
                return Err(Error::invalid("--check-jacobi needs --dim 2"));
            }
            let mut csv = Csv::new(if check_jacobi {
                &["n", "count", "jacobi"]
            } else {
                &["n", "count"]
            });
            let mut mismatches = Vec::new();
            for n in 0..=max {
                let c = sum_of_squares_count(dim, n as i64)?.count;
                if check_jacobi && n >= 1 {
                    let j = jacobi_count(n as i64)?;
                    if j != c {
                        mismatches.push(n);
                    }
                    csv.row(&[n.to_string(), c.to_string(), j.to_string()]);
                } else if check_jacobi {
                    csv.row(&[n.to_string(), c.to_string(), String::new()]);
                } else {
                    csv.row(&[n.to_string(), c.to_string()]);
                }
            }
            let pass = mismatches.is_empty();
            let body = json!({"max": max, "mismatches": mismatches, "pass": pass});
            Ok(Outcome {
                cfg,
                csv,
                body,
                pass,
                numeric_failure: false,
            })
        }
        Command::Clusters {
            dim,
            n,
            c,
            exponent,
            out,
        } => {
            let mut cfg = RunConfig::new("clusters", &out.out);
            cfg.dim = Some(dim);
            cfg.n = Some(n.to_string());
            cfg.c = Some(c);
            cfg.exponent = exponent;
            let shell = enumerate_shell(dim, n as i64)?;
            let dec = cluster_decompose_with(
                &shell,
                ClusterOptions {
                    c,
                    exponent,
                    geometry: true,
                },
            )?;
            let mut csv = Csv::new(&["cluster", "size", "diameter", "affine_dimension", "radius_sq"]);
            for (i, cl) in dec.clusters.iter().enumerate() {
                csv.row(&[
                    i.to_string(),
                    cl.indices.len().to_string(),
                    fmt_f64(cl.diameter),
                    cl.affine_dimension.map_or(String::new(), |a| a.to_string()),
                    cl.circumsphere
                        .as_ref()
                        .map_or(String::new(), |s| s.radius_sq.to_string()),
                ]);
            }
            let pass = dec.min_intercluster_distance > dec.threshold;
            let body = to_value(&dec)?;
            Ok(Outcome {
                cfg,
                csv,
                body,
                pass,
                numeric_failure: false,
            })
        }
        Command::Jarnik { max, c, out } => {
            let mut cfg = RunConfig::new("jarnik", &out.out);
            cfg.dim = Some(2);
            cfg.n = Some(format!("1..{max}"));
            cfg.c = Some(c);
            let r = jarnik_audit(max, c)?;
            let mut csv = Csv::new(&[
                "n_max",
                "c",
                "shells_checked",
                "max_cluster_size",
                "max_diameter_ratio",
                "pass",
            ]);
            csv.row(&[
                max.to_string(),
                fmt_f64(c),
                r.shells_checked.to_string(),
                r.max_cluster_size.to_string(),
                fmt_f64(r.max_diameter_ratio),
                r.pass.to_string(),
            ]);
            Ok(Outcome {
                cfg,
                csv,
                pass: r.pass,
                body: to_value(&r)?,
                numeric_failure: false,
            })
        }
        Command::Gram {
            dim,
            n,
            measure,
            cap,
            out,
        } => {
            let mut cfg = RunConfig::new("gram", &out.out);
            cfg.dim = Some(dim);
            cfg.n = Some(n.to_string());
            cfg.cap = Some(cap);
            let m = load_measure(&measure, &mut cfg)?;
            let shell = enumerate_shell(dim, n as i64)?;
            if shell.is_empty() {
                return Err(Error::Empty(format!("shell d = {dim}, n = {n} is empty")));
            }
            let g = assemble_gram_capped(&shell.points, &m, cap)?;
            let mut csv = Csv::new(&[
                "n",
                "N",
                "lambda_min",
                "lambda_max",
                "residual_min",
                "residual_max",
            ]);
            csv.row(&[
                n.to_string(),
                shell.len().to_string(),
                fmt_f64(g.lambda_min()),
                fmt_f64(g.lambda_max()),
                fmt_f64(g.extremes.residual_min),
                fmt_f64(g.extremes.residual_max),
            ]);
            let pass = g.lambda_min() >= -1e-8;
            Ok(Outcome {
                cfg,
                csv,
                body: to_value(&g)?,
                pass,
                numeric_failure: false,
            })
        }
        Command::Sweep {
            dim,
            n,
            measure,
            cap,
            semiclassical_cut,
            out,
        } => {
            let mut cfg = RunConfig::new("sweep", &out.out);
            cfg.dim = Some(dim);
            cfg.n = Some(n.1.clone());
            cfg.cap = Some(cap);
            cfg.extra = json!({"semiclassical_cut": semiclassical_cut});
            let m = load_measure(&measure, &mut cfg)?;
            let r = constants_sweep_with(
                dim,
                &n.0,
                &m,
                SweepConfig {
                    cap,
                    semiclassical_cut,
                },
            )?;
            let mut csv = Csv::new(&["n", "N", "lambda_min", "lambda_max", "status"]);
            for row in &r.rows {
                csv.row(&[
                    row.n.to_string(),
                    row.count.to_string(),
                    fmt_f64(row.lambda_min),
                    fmt_f64(row.lambda_max),
                    row.status.clone(),
                ]);
            }
            let numeric_failure = r.rows.iter().any(|x| x.numeric_failure);
            let pass = r.inf_lambda_min >= -1e-8 || r.inf_lambda_min.is_infinite();
            Ok(Outcome {
                cfg,
                csv,
                body: to_value(&r)?,
                pass,
                numeric_failure,
            })
        }
        Command::Blocks {
            dim,
            n,
            measure,
            c,
            exponent,
            out,
        } => {
            let mut cfg = RunConfig::new("blocks", &out.out);
            cfg.dim = Some(dim);
            cfg.n = Some(n.1.clone());
            cfg.c = Some(c);
            cfg.exponent = exponent;
            let m = load_measure(&measure, &mut cfg)?;
            let opts = ClusterOptions {
                c,
                exponent,
                geometry: false,
            };
            let mut csv = Csv::new(&[
                "n",
                "N",
                "clusters",
                "max_cluster_size",
                "block_min",
                "block_max",
                "cross_bound",
                "lambda_min",
                "lambda_max",
                "sandwich",
                "dyadic_sups",
            ]);
            let mut rows = Vec::new();
            let mut pass = true;
            for &nn in &n.0 {
                if sum_of_squares_count(dim, nn as i64)?.count == 0 {
                    continue;
                }
                let b = cluster_block_split(nn, dim, &m, opts)?;
                pass &= b.sandwich_holds;
                csv.row(&[
                    nn.to_string(),
                    b.count.to_string(),
                    b.clusters.to_string(),
                    b.max_cluster_size.to_string(),
                    fmt_f64(b.block_min),
                    fmt_f64(b.block_max),
                    fmt_f64(b.cross_bound),
                    fmt_f64(b.lambda_min),
                    fmt_f64(b.lambda_max),
                    b.sandwich_holds.to_string(),
                    b.dyadic
                        .iter()
                        .map(|x| fmt_f64(x.sup))
                        .collect::<Vec<_>>()
                        .join(";"),
                ]);
                rows.push(b);
            }
            Ok(Outcome {
                cfg,
                csv,
                body: to_value(&rows)?,
                pass,
                numeric_failure: false,
            })
        }
        Command::Bourgain {
            dim,
            n,
            x0,
            c0,
            samples,
            seed,
            dump,
            out,
        } => {
            let mut cfg = RunConfig::new("bourgain", &out.out);
            cfg.dim = Some(dim);
            cfg.n = Some(n.1.clone());
            cfg.seed = Some(seed);
            cfg.extra = json!({"c0": c0, "samples": samples});
            let x0 = check_dim_point(x0, dim)?;
            let mut csv = Csv::new(&["n", "N", "radius", "min_ratio", "violations", "pass"]);
            let mut reports = Vec::new();
            let mut last = None;
            let mut pass = true;
            for &nn in &n.0 {
                let shell = enumerate_shell(dim, nn as i64)?;
                if shell.is_empty() {
                    continue;
                }
                let r = concentration_check(&shell, &x0, c0, samples, seed)?;
                pass &= r.pass;
                csv.row(&[
                    nn.to_string(),
                    r.count.to_string(),
                    fmt_f64(r.radius),
                    fmt_f64(r.min_ratio),
                    r.violation_count.to_string(),
                    r.pass.to_string(),
                ]);
                reports.push(r);
                last = Some(shell);
            }
            let coeffs = match (dump, &last) {
                (true, Some(s)) => to_value(&bourgain(s, &x0)?)?,
                _ => Value::Null,
            };
            let body = json!({"x0": x0, "reports": reports, "coefficients": coeffs});
            Ok(Outcome {
                cfg,
                csv,
                body,
                pass,
                numeric_failure: false,
            })
        }
        Command::Frostman {
            dim,
            n,
            measure,
            x0,
            c0,
            out,
        } => {
            let mut cfg = RunConfig::new("frostman", &out.out);
            cfg.dim = Some(dim);
            cfg.n = Some(n.1.clone());
            cfg.extra = json!({"c0": c0});
            let m = load_measure(&measure, &mut cfg)?;
            let x0 = check_dim_point(x0, dim)?;
            let r = frostman_audit(&m, dim, &n.0, &x0, c0)?;
            let mut csv = Csv::new(&[
                "n",
                "N",
                "r",
                "mass",
                "form_bound",
                "bound",
                "trace_bound",
                "chain",
            ]);
            for row in &r.rows {
                csv.row(&[
                    row.n.to_string(),
                    row.count.to_string(),
                    fmt_f64(row.r),
                    fmt_f64(row.mass),
                    fmt_f64(row.form_bound),
                    fmt_f64(row.bound),
                    fmt_f64(row.trace_bound),
                    row.chain_holds.to_string(),
                ]);
            }
            Ok(Outcome {
                cfg,
                csv,
                pass: r.pass,
                body: to_value(&r)?,
                numeric_failure: false,
            })
        }
        Command::Cylinder { dim, n, out } => {
            let mut cfg = RunConfig::new("cylinder", &out.out);
            cfg.dim = Some(dim);
            cfg.n = Some(n.1.clone());
            let mut csv = Csv::new(&["n", "d", "ratio", "expected", "relative_error", "pass"]);
            let mut rows = Vec::new();
            let mut pass = true;
            for &nn in &n.0 {
                if n.0.len() > 1 && sum_of_squares_count(2, nn as i64)?.count == 0 {
                    continue;
                }
                let r = cylinder_witness(nn, dim)?;
                pass &= r.pass;
                csv.row(&[
                    nn.to_string(),
                    dim.to_string(),
                    fmt_f64(r.ratio),
                    r.expected.to_string(),
                    fmt_f64(r.relative_error),
                    r.pass.to_string(),
                ]);
                rows.push(r);
            }
            Ok(Outcome {
                cfg,
                csv,
                body: to_value(&rows)?,
                pass,
                numeric_failure: false,
            })
        }
        Command::Nullspace {
            patch,
            eps,
            eta,
            n,
            radius,
            out,
        } => {
            let mut cfg = RunConfig::new("nullspace", &out.out);
            cfg.eps = Some(eps);
            cfg.eta = Some(eta);
            let p = load_patch(&patch, &mut cfg)?;
            let d = p.d();
            cfg.dim = Some(d);
            let nn = match (n, radius) {
                (Some(n), _) => n,
                (None, Some(r)) => rich_shell_near(d, r, 1.0)?.n,
                (None, None) => return Err(Error::invalid("nullspace needs --n or --radius")),
            };
            cfg.n = Some(nn.to_string());
            cfg.extra = json!({"radius": radius});
            let shell = enumerate_shell(d, nn as i64)?;
            let a = amatrix(&p, eps, eta, &shell)?;
            let sol = nullspace_eigenfunction(&a)?;
            let decay = decay_audit(&a).ok();
            let mut csv = Csv::new(&[
                "n",
                "N",
                "rows",
                "head_rows",
                "residual",
                "guard_residual",
                "no_kernel",
            ]);
            csv.row(&[
                nn.to_string(),
                shell.len().to_string(),
                a.rows.len().to_string(),
                a.head_rows.to_string(),
                fmt_f64(sol.residual),
                fmt_f64(sol.guard_residual),
                sol.no_kernel.to_string(),
            ]);
            let pass = !sol.no_kernel && sol.residual <= 1e-8;
            let body = json!({"matrix": a, "solution": sol, "decay": decay});
            Ok(Outcome {
                cfg,
                csv,
                body,
                pass,
                numeric_failure: false,
            })
        }
        Command::Vanish {
            patch,
            eps,
            eta,
            radii,
            out,
        } => {
            let mut cfg = RunConfig::new("vanish", &out.out);
            cfg.eps = Some(eps);
            cfg.eta = Some(eta);
            cfg.extra = json!({"radii": radii});
            let p = load_patch(&patch, &mut cfg)?;
            cfg.dim = Some(p.d());
            let r = vanish_sweep(&p, eps, eta, &radii)?;
            let mut csv = Csv::new(&[
                "radius",
                "n",
                "N",
                "rows",
                "residual",
                "guard_residual",
                "ratio",
                "bourgain_ratio",
            ]);
            for row in &r.rows {
                csv.row(&[
                    fmt_f64(row.radius),
                    row.n.to_string(),
                    row.count.to_string(),
                    row.rows.to_string(),
                    fmt_f64(row.residual),
                    fmt_f64(row.guard_residual),
                    fmt_f64(row.ratio),
                    fmt_f64(row.bourgain_ratio),
                ]);
            }
            Ok(Outcome {
                cfg,
                csv,
                pass: r.pass,
                body: to_value(&r)?,
                numeric_failure: false,
            })
        }
        Command::Cantor {
            alpha,
            eps,
            depth,
            out,
        } => {
            let mut cfg = RunConfig::new("cantor", &out.out);
            cfg.alpha = Some(alpha);
            cfg.eps = Some(eps);
            cfg.depth = Some(depth);
            let r = cantor_bound_check(alpha, eps, depth)?;
            let mut csv = Csv::new(&["depth", "seminorm", "partial", "bound", "increment", "shrink"]);
            for row in &r.rows {
                csv.row(&[
                    row.depth.to_string(),
                    fmt_f64(row.seminorm),
                    fmt_f64(row.partial),
                    fmt_f64(row.bound),
                    fmt_f64(row.increment),
                    row.shrink.map_or(String::new(), fmt_f64),
                ]);
            }
            Ok(Outcome {
                cfg,
                csv,
                pass: r.pass,
                body: to_value(&r)?,
                numeric_failure: false,
            })
        }
        Command::Irregular { n, eps, out } => {
            let mut cfg = RunConfig::new("irregular", &out.out);
            cfg.n = Some(n.to_string());
            cfg.eps = Some(eps);
            let r = irregular_divergence_audit(n, eps)?;
            let mut csv = Csv::new(&[
                "N",
                "partial",
                "closed_form",
                "relative_gap",
                "partial_tenth",
                "growth_ratio",
            ]);
            csv.row(&[
                n.to_string(),
                fmt_f64(r.partial),
                fmt_f64(r.closed_form),
                fmt_f64(r.relative_gap),
                r.partial_tenth.map_or(String::new(), fmt_f64),
                r.growth_ratio.map_or(String::new(), fmt_f64),
            ]);
            Ok(Outcome {
                cfg,
                csv,
                pass: r.pass,
                body: to_value(&r)?,
                numeric_failure: false,
            })
        }
        Command::MeasureProbe {
            measure,
            k_max,
            decay_k,
            out,
        } => {
            let mut cfg = RunConfig::new("measure-probe", &out.out);
            cfg.extra = json!({"k_max": k_max, "decay_k": decay_k});
            let m = load_measure(&measure, &mut cfg)?;
            cfg.dim = Some(m.d());
            let sup = sup_offzero(&m, k_max)?;
            let fit = decay_fit(&m, decay_k)?;
            let mut csv = Csv::new(&["j", "lo", "hi", "sup", "at_radius", "samples"]);
            for b in &fit.blocks {
                csv.row(&[
                    b.j.to_string(),
                    fmt_f64(b.lo),
                    fmt_f64(b.hi),
                    fmt_f64(b.sup),
                    fmt_f64(b.at_radius),
                    b.samples.to_string(),
                ]);
            }
            let body = json!({"sup_offzero": sup, "decay": fit});
            Ok(Outcome {
                cfg,
                csv,
                body,
                pass: true,
                numeric_failure: false,
            })
        }
    }
}

/// Runs the CLI on `argv` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.cmd) {
        Ok(o) => {
            let status = if o.numeric_failure {
                EXIT_NUMERIC
            } else if o.pass {
                EXIT_OK
            } else {
                EXIT_AUDIT
            };
            let mut body = o.body;
            if let Value::Object(map) = &mut body {
                map.insert("pass".into(), Value::Bool(o.pass));
            }
            match write_reports(&o.cfg, &o.csv, body) {
                Ok((csv, json)) => {
                    println!("{}", csv.display());
                    println!("{}", json.display());
                    if status == EXIT_AUDIT {
                        eprintln!("{}: audit failed", o.cfg.command);
                    }
                    status
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_USAGE
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                EXIT_NUMERIC
            } else {
                EXIT_USAGE
            }
        }
    }
}
