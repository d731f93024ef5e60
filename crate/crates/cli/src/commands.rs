use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use anderson_core::criticality::{
    classify_energy, default_grid_n, example1_critical_types, example2_reflectionless,
    negative_axis_zeros, nj_construction, scan_reflection_zeros, CriticalityReport,
    DEFAULT_ZERO_TOL,
};
use anderson_core::experiments::{
    sqrt_growth_experiment_with, Type2Spec, WalkConfig, QUANTILE_LEVELS,
};
use anderson_core::furstenberg::{
    noncompactness_witness, strong_irreducibility_check, DEFAULT_ORBIT_DEPTH,
};
use anderson_core::lyapunov::{gamma_curve, EnsembleConfig, Estimator};
use anderson_core::scattering::jost_coefficients;
use anderson_core::{Complex64, Error, Exec, SingleSitePotential};

use crate::config::Config;
use crate::manifest::RunManifest;
use crate::{CliError, EstimatorArg, PotentialArgs};

/// Full-precision CSV number (17 significant digits).
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Copy, Debug)]
pub enum Plot {
    Scatter,
    Gamma,
    Walk,
}

impl Plot {
    fn script(self, data: &Path) -> String {
        let data = data.display();
        let body = match self {
            Plot::Scatter => format!(
                "set xlabel 'k'\nset logscale y\nplot '{data}' using 1:7 with lines title '|b(k)|', \\\n     '{data}' using 1:(abs($8)+1e-17) with lines title 'Wronskian residual'\n"
            ),
            Plot::Gamma => format!(
                "set xlabel 'E'\nset ylabel 'gamma'\nplot '{data}' using 1:2:3 with yerrorbars title 'gamma_hat', 0 notitle\n"
            ),
            Plot::Walk => format!(
                "set xlabel 'N'\nset logscale xy\nf(x) = c*sqrt(x)\nfit f(x) '{data}' using 1:2 via c\nplot '{data}' using 1:2 with linespoints title 'E|S_N|', f(x) title 'c sqrt(N)'\n"
            ),
        };
        format!("set datafile separator ','\nset key autotitle columnhead\n{body}pause -1\n")
    }
}

pub enum Output {
    Csv {
        manifest: RunManifest,
        header: Vec<&'static str>,
        rows: Vec<String>,
        footer: Vec<String>,
        plot: Plot,
    },
    Json {
        manifest: RunManifest,
        results: Value,
    },
}

impl Output {
    fn render(&self) -> String {
        match self {
            Output::Csv {
                manifest,
                header,
                rows,
                footer,
                ..
            } => {
                let mut text = manifest.csv_comment();
                text.push('\n');
                text.push_str(&header.join(","));
                text.push('\n');
                for line in rows.iter().chain(footer) {
                    text.push_str(line);
                    text.push('\n');
                }
                text
            }
            Output::Json { manifest, results } => {
                let mut text = serde_json::to_string_pretty(
                    &json!({ "manifest": manifest, "results": results }),
                )
                .expect("serializable");
                text.push('\n');
                text
            }
        }
    }

    pub fn emit(&self, out: Option<&Path>, gnuplot: Option<&Path>) -> Result<(), CliError> {
        let io = |p: &Path, e: std::io::Error| {
            CliError::Usage(format!("cannot write {}: {e}", p.display()))
        };
        if let Some(script) = gnuplot {
            let Output::Csv { plot, .. } = self else {
                return Err(CliError::Usage(
                    "--gnuplot is only available for CSV output".into(),
                ));
            };
            let data = out
                .ok_or_else(|| CliError::Usage("--gnuplot needs --out for the data file".into()))?;
            std::fs::write(script, plot.script(data)).map_err(|e| io(script, e))?;
        }
        let text = self.render();
        match out {
            Some(path) => std::fs::write(path, text).map_err(|e| io(path, e)),
            None => {
                use std::io::Write;
                std::io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(|e| io(Path::new("stdout"), e))
            }
        }
    }
}

/// The potential and its description for the manifest.
fn load_potential(
    cfg: &Config,
    args: &PotentialArgs,
) -> Result<(SingleSitePotential, Value), CliError> {
    let (file, ex1, ex2) = if args.potential.is_some() || args.ex1.is_some() || args.ex2.is_some() {
        (args.potential.clone(), args.ex1, args.ex2)
    } else {
        (
            cfg.get::<PathBuf>("potential")?,
            cfg.get::<f64>("ex1")?,
            cfg.get::<f64>("ex2")?,
        )
    };
    let core = |e: Error| CliError::from_core("potential", e);
    match (file, ex1, ex2) {
        (Some(path), None, None) => {
            let text = std::fs::read_to_string(&path).map_err(|e| {
                CliError::Usage(format!("cannot read potential {}: {e}", path.display()))
            })?;
            let p = SingleSitePotential::from_json(&text).map_err(|e| {
                CliError::Usage(format!("invalid potential {}: {e}", path.display()))
            })?;
            Ok((p, json!({ "potential": path })))
        }
        (None, Some(l), None) => Ok((
            SingleSitePotential::constant(l).map_err(core)?,
            json!({ "ex1": l }),
        )),
        (None, None, Some(l)) => Ok((
            SingleSitePotential::antisymmetric_step(l).map_err(core)?,
            json!({ "ex2": l }),
        )),
        (None, None, None) => Err(CliError::Usage(
            "give a potential with --potential, --ex1 or --ex2".into(),
        )),
        _ => Err(CliError::Usage(
            "--potential, --ex1 and --ex2 are mutually exclusive".into(),
        )),
    }
}

fn with_potential(mut params: Value, source: Value) -> Value {
    if let (Value::Object(p), Value::Object(s)) = (&mut params, source) {
        p.extend(s);
    }
    params
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

pub fn scatter(
    cfg: &Config,
    pot: &PotentialArgs,
    k_range: Option<Vec<f64>>,
    k_points: Option<usize>,
) -> Result<Output, CliError> {
    let (p, source) = load_potential(cfg, pot)?;
    let [lo, hi] = cfg
        .pick_range(k_range, "k-range", Some([0.1, 20.0]))?
        .expect("default");
    let n = cfg.pick_or(k_points, "k-points", 500usize)?;
    if !(lo > 0.0 && hi >= lo) || n == 0 {
        return Err(CliError::Usage(
            "need 0 < k_lo <= k_hi and k-points > 0".into(),
        ));
    }
    let ks = linspace(lo, hi, n);
    let rows = Exec::default()
        .map_slice(&ks, |&k| {
            jost_coefficients(&p, Complex64::new(k, 0.0)).map(|s| (k, s))
        })
        .into_iter()
        .map(|r| {
            let (k, s) = r.map_err(|e| CliError::from_core("scatter", e))?;
            Ok([
                k,
                k * k,
                s.a.re,
                s.a.im,
                s.b.re,
                s.b.im,
                s.b.norm(),
                s.wronskian_residual(),
            ]
            .map(num)
            .join(","))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let params = with_potential(json!({ "k-range": [lo, hi], "k-points": n }), source);
    Ok(Output::Csv {
        manifest: RunManifest::new("scatter", params, None, Some(&p)),
        header: vec![
            "k",
            "E",
            "re_a",
            "im_a",
            "re_b",
            "im_b",
            "abs_b",
            "wronskian_residual",
        ],
        rows,
        footer: Vec::new(),
        plot: Plot::Scatter,
    })
}

pub fn critical(
    cfg: &Config,
    pot: &PotentialArgs,
    k_range: Option<Vec<f64>>,
    alpha_range: Option<Vec<f64>>,
    tol: Option<f64>,
    energies: Option<Vec<f64>>,
) -> Result<Output, CliError> {
    let (p, source) = load_potential(cfg, pot)?;
    let [k_lo, k_hi] = cfg
        .pick_range(k_range, "k-range", Some([0.5, 10.0]))?
        .expect("default");
    let alpha = cfg
        .pick_range(alpha_range, "alpha-range", Some([0.1, 10.0]))?
        .expect("default");
    let tol = cfg.pick_or(tol, "tol", DEFAULT_ZERO_TOL)?;
    let extra: Vec<f64> = cfg.pick(energies, "E")?.unwrap_or_default();
    let exec = Exec::default();
    let core = |e: Error| CliError::from_core("critical", e);

    let positive = scan_reflection_zeros(&p, k_lo, k_hi, default_grid_n(k_lo, k_hi), tol, exec)
        .map_err(core)?;
    let negative = negative_axis_zeros(
        &p,
        alpha[0],
        alpha[1],
        default_grid_n(alpha[0], alpha[1]),
        tol,
        exec,
    )
    .map_err(core)?;

    let mut candidates: Vec<f64> = positive.zeros.iter().map(|z| z.energy).collect();
    candidates.extend(negative.zeros.iter().map(|z| z.energy));
    let first = (2.0 * k_lo / PI).ceil().max(1.0) as u64;
    let last = (2.0 * k_hi / PI).floor() as u64;
    candidates.extend((first..=last).map(|n| (n as f64 * PI / 2.0).powi(2)));
    candidates.extend(extra.iter().copied());
    candidates.sort_by(f64::total_cmp);
    candidates.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    let reports: Vec<CriticalityReport> =
        exec.map_slice(&candidates, |&e| classify_energy(&p, e, tol));

    let params = with_potential(
        json!({ "k-range": [k_lo, k_hi], "alpha-range": alpha, "tol": tol, "E": extra }),
        source,
    );
    Ok(Output::Json {
        manifest: RunManifest::new("critical", params, None, Some(&p)),
        results: json!({ "reflection_zeros": positive, "negative_axis_zeros": negative, "reports": reports }),
    })
}

pub struct GammaFlags {
    pub energies: Option<Vec<f64>>,
    pub e_range: Option<Vec<f64>>,
    pub e_points: Option<usize>,
    pub steps: Option<usize>,
    pub realizations: Option<usize>,
    pub p: Option<f64>,
    pub estimator: Option<EstimatorArg>,
}

pub fn gamma(
    cfg: &Config,
    pot: &PotentialArgs,
    flags: GammaFlags,
    seed: u64,
) -> Result<Output, CliError> {
    let (p, source) = load_potential(cfg, pot)?;
    let energies = match cfg.pick::<Vec<f64>>(flags.energies, "E")? {
        Some(list) => list,
        None => match cfg.pick_range(flags.e_range, "e-range", None)? {
            Some([lo, hi]) => linspace(lo, hi, cfg.pick_or(flags.e_points, "e-points", 50usize)?),
            None => {
                return Err(CliError::Usage(
                    "give energies with --E or --e-range".into(),
                ))
            }
        },
    };
    let steps = cfg.pick_or(flags.steps, "steps", 100_000usize)?;
    let realizations = cfg.pick_or(flags.realizations, "realizations", 100usize)?;
    let p_one = cfg.pick_or(flags.p, "p", 0.5)?;
    let estimator = cfg.pick_or(flags.estimator, "estimator", EstimatorArg::Vector)?;
    let config = EnsembleConfig::new(p_one, steps, realizations, seed)
        .map_err(|e| CliError::from_core("gamma", e))?;
    let kind = match estimator {
        EstimatorArg::Vector => Estimator::VectorNorm,
        EstimatorArg::Matrix => Estimator::MatrixNorm,
    };
    let rows = gamma_curve(&p, &energies, &config, kind)
        .into_iter()
        .map(|row| {
            let status = format!("{:?}", row.status);
            match row.estimate {
                Ok(est) => format!(
                    "{},{},{},{},{},{},{}",
                    num(row.energy),
                    num(est.gamma_hat),
                    num(est.std_error),
                    est.n_steps,
                    est.n_realizations,
                    est.estimator,
                    status
                ),
                Err(msg) => {
                    eprintln!("{}", json!({ "row_error": msg, "E": row.energy }));
                    format!(
                        "{},{},{},{steps},{realizations},{kind},{status}",
                        num(row.energy),
                        num(f64::NAN),
                        num(f64::NAN)
                    )
                }
            }
        })
        .collect();
    let params = with_potential(
        json!({ "E": energies, "steps": steps, "realizations": realizations, "p": p_one, "estimator": estimator }),
        source,
    );
    Ok(Output::Csv {
        manifest: RunManifest::new("gamma", params, Some(seed), Some(&p)),
        header: vec![
            "E",
            "gamma_hat",
            "std_error",
            "n_steps",
            "n_realizations",
            "estimator",
            "criticality_status",
        ],
        rows,
        footer: Vec::new(),
        plot: Plot::Gamma,
    })
}

fn error_json(e: &Error) -> Value {
    let kind = format!("{e:?}");
    json!({ "error": kind.split(|c: char| !c.is_alphanumeric()).next(), "message": e.to_string() })
}

pub fn furstenberg(
    cfg: &Config,
    pot: &PotentialArgs,
    energies: Option<Vec<f64>>,
    max_word_len: Option<usize>,
    directions: Option<usize>,
    orbit_depth: Option<usize>,
) -> Result<Output, CliError> {
    let (p, source) = load_potential(cfg, pot)?;
    let energies = cfg
        .pick::<Vec<f64>>(energies, "E")?
        .ok_or_else(|| CliError::Usage("give energies with --E".into()))?;
    let max_len = cfg.pick_or(max_word_len, "max-word-len", 500usize)?;
    let dirs = cfg.pick_or(directions, "directions", 64usize)?;
    let depth = cfg.pick_or(orbit_depth, "orbit-depth", DEFAULT_ORBIT_DEPTH)?;
    let verdicts: Vec<Value> = Exec::default().map_slice(&energies, |&e| {
        let report = classify_energy(&p, e, DEFAULT_ZERO_TOL);
        let witness = noncompactness_witness(&p, e, max_len);
        let rotation_compact = matches!(witness, Err(Error::ZeroReflection { .. }));
        json!({
            "energy": e,
            "status": report.status,
            "reasons": report.reasons,
            "witness": match &witness {
                Ok(w) => json!(w),
                Err(err) => error_json(err),
            },
            "rotation_compact": rotation_compact,
            "irreducibility": strong_irreducibility_check(&p, e, dirs, depth),
        })
    });
    let params = with_potential(
        json!({ "E": energies, "max-word-len": max_len, "directions": dirs, "orbit-depth": depth }),
        source,
    );
    Ok(Output::Json {
        manifest: RunManifest::new("furstenberg", params, None, Some(&p)),
        results: Value::Array(verdicts),
    })
}

pub fn walk(
    cfg: &Config,
    n: Option<u64>,
    m: Option<u64>,
    p: Option<f64>,
    pairs: Option<usize>,
    realizations: Option<usize>,
    seed: u64,
) -> Result<Output, CliError> {
    let n = cfg.pick_or(n, "n", 2u64)?;
    let m = cfg.pick_or(m, "m", 1u64)?;
    let p_one = cfg.pick_or(p, "p", 0.5)?;
    let pairs = cfg.pick_or(pairs, "pairs", 1usize << 17)?;
    let realizations = cfg.pick_or(realizations, "realizations", 2000usize)?;
    let core = |e: Error| CliError::from_core("walk", e);
    let spec = Type2Spec::new(n, m, p_one).map_err(core)?;
    let report = sqrt_growth_experiment_with(&spec, &WalkConfig::new(pairs, realizations, seed))
        .map_err(core)?;
    let rows = report
        .checkpoints
        .iter()
        .map(|c| {
            let mut fields = vec![
                c.n.to_string(),
                num(c.mean_abs_s),
                num(c.mean_abs_s_over_sqrt_n),
            ];
            fields.extend(c.quantiles.iter().map(|&q| num(q)));
            fields.join(",")
        })
        .collect();
    let footer = vec![
        format!("# fitted_exponent {}", num(report.fitted_exponent)),
        format!(
            "# mean_abs_S_over_sqrtN {}",
            num(report.mean_abs_s_over_sqrt)
        ),
        format!("# clt_prediction {}", num(report.clt_prediction)),
        format!(
            "# gamma_hat {} std_error {}",
            num(report.gamma_hat.gamma_hat),
            num(report.gamma_hat.std_error)
        ),
        format!(
            "# max_honest_deviation {}",
            num(report.max_honest_deviation)
        ),
    ];
    debug_assert_eq!(QUANTILE_LEVELS.len(), 5);
    let params =
        json!({ "n": n, "m": m, "p": p_one, "pairs": pairs, "realizations": realizations });
    Ok(Output::Csv {
        manifest: RunManifest::new("walk", params, Some(seed), Some(&spec.potential())),
        header: vec![
            "N",
            "mean_abs_S",
            "mean_abs_S_over_sqrtN",
            "q05_abs_S",
            "q25_abs_S",
            "q50_abs_S",
            "q75_abs_S",
            "q95_abs_S",
        ],
        rows,
        footer,
        plot: Plot::Walk,
    })
}

pub fn examples(cfg: &Config, lambda_j: Option<u32>) -> Result<Output, CliError> {
    let lambda_j = cfg.pick::<u32>(lambda_j, "lambda-j")?;
    let example1: Vec<Value> = [(1.0, 50.0), (2.0 * PI * PI, 30.0)]
        .iter()
        .map(|&(lambda, e_max)| json!({ "lambda": lambda, "e_max": e_max, "critical": example1_critical_types(lambda, e_max) }))
        .collect();
    let example2: Vec<Value> = [3u64, 8, 24, 80]
        .iter()
        .map(|&n| {
            let lambda = 2.0 * PI * PI * n as f64;
            json!({ "N": n, "lambda": lambda, "pairs": example2_reflectionless(lambda, 1e-9) })
        })
        .collect();
    let js: Vec<u32> = match lambda_j {
        Some(j) => vec![j],
        None => (1..=5).collect(),
    };
    let nj = js
        .iter()
        .map(|&j| {
            let c = nj_construction(j).map_err(|e| CliError::from_core("examples", e))?;
            let verified = c.pairs.iter().all(|&(n, m)| (n as u128).pow(2) - (m as u128).pow(2) == c.n_j as u128);
            Ok(json!({ "j": c.j, "N_j": c.n_j, "lambda": c.lambda, "pair_count": c.pairs.len(), "pairs": c.pairs, "verified": verified }))
        })
        .collect::<Result<Vec<Value>, CliError>>()?;
    Ok(Output::Json {
        manifest: RunManifest::new("examples", json!({ "lambda-j": lambda_j }), None, None),
        results: json!({ "example1": example1, "example2_reflectionless": example2, "nj": nj }),
    })
}
