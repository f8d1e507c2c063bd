use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use thermocool::conversion::{
    conversion_feasible, conversion_feasible_exact, erasure_target, landauer_audit,
    ConversionWitness,
};
use thermocool::deviation::{
    achievable_relative_betas, can_cool, deviation_rate, deviation_vectors, limit_temperatures,
    max_diag_deviation, qubit_deviation,
};
use thermocool::inference::{stein_limit, temperature_sequence};
use thermocool::linalg::{diag, kron, CMatrix, SpectralDecomposition};
use thermocool::model::{gibbs_distribution, Units};
use thermocool::typical_sim::convergence_report;
use thermocool::unitary::{
    gap_compatibility, optimal_shell_sort, optimality_check, qubit_axis, random_allowed_unitary,
};
use thermocool::{Caps, Qubit};

use crate::objects::Objects;
use crate::output::{num, nums, Failure, Report};
use crate::{Command, RunConfig};

pub fn run(config: &RunConfig) -> Result<String, Failure> {
    let path = config
        .objects
        .as_deref()
        .ok_or_else(|| Failure::input("missing --objects PATH"))?;
    let objects = Objects::load(path, config.beta)?;
    let report = dispatch(config, &objects)?;
    let format = config.format.unwrap_or_else(|| report.default_format());
    Ok(report.render(format))
}

fn caps(config: &RunConfig) -> Caps {
    Caps {
        enumeration: config.cap,
        matrix_dim: config.matrix_cap,
    }
}

fn units(config: &RunConfig) -> Result<Units, Failure> {
    if !(config.boltzmann > 0.0 && config.boltzmann.is_finite()) {
        return Err(Failure::input("--boltzmann must be positive and finite"));
    }
    Ok(Units {
        boltzmann: config.boltzmann,
    })
}

fn dispatch(config: &RunConfig, objects: &Objects) -> Result<Report, Failure> {
    let caps = caps(config);
    let units = units(config)?;
    match &config.command {
        Command::Deviation { name, nfold } => {
            let o = objects.get(name)?;
            match nfold {
                None => {
                    let d = max_diag_deviation(&o);
                    Ok(Report::Doc(json!({
                        "value": num(d.value),
                        "witness": [d.witness.0, d.witness.1],
                        "finite": d.finite,
                    })))
                }
                Some(n) => {
                    let rates = deviation_rate(&o, *n, &caps)?;
                    let rows = rates
                        .iter()
                        .enumerate()
                        .map(|(k, r)| vec![json!(k + 1), num(r * (k + 1) as f64), num(*r)])
                        .collect();
                    Ok(Report::Table {
                        columns: vec!["n", "deviation", "rate"],
                        rows,
                        meta: Map::new(),
                    })
                }
            }
        }
        Command::Limits {
            name,
            gap,
            qubit_beta,
        } => {
            let o = objects.get(name)?;
            let l = limit_temperatures(&o, *gap)?;
            let mut doc = json!({
                "deviation": num(l.deviation),
                "beta_lower_limit": num(l.beta_lower_limit),
                "beta_upper_limit": num(l.beta_upper_limit),
                "temperature_lower_limit": num(units.temperature(l.beta_lower_limit)),
                "temperature_upper_limit": num(units.temperature(l.beta_upper_limit)),
            });
            if let Some(bq) = qubit_beta {
                let q = Qubit::thermal(*gap, *bq, objects.beta)?;
                let v = can_cool(&o, &q);
                doc["qubit"] = json!({
                    "beta": num(*bq),
                    "deviation": num(qubit_deviation(&q)),
                    "cool": v.cool,
                    "heat": v.heat,
                    "worthless": v.worthless,
                });
            }
            Ok(Report::Doc(doc))
        }
        Command::Convert { pair, exact } => {
            let a = objects.classical(&pair.from)?;
            let b = objects.classical(&pair.to)?;
            let w = if *exact {
                conversion_feasible_exact(&a, &b)?
            } else {
                conversion_feasible(&a, &b)?
            };
            let mut doc = witness_json(&w);
            doc["gaps_compatible"] = json!(gap_compatibility(&a.energies(), &b.energies(), 1e-9));
            doc["exact"] = json!(exact);
            Ok(Report::Doc(doc))
        }
        Command::Landauer { name, n, to } => {
            let o = objects.classical(name)?;
            let target = match to {
                Some(t) => objects.classical(t)?,
                None => erasure_target(objects.beta)?,
            };
            let r = landauer_audit(&o, *n, &target)?;
            Ok(Report::Doc(json!({
                "copies": r.copies,
                "forward_total": num(r.forward_total),
                "forward_required": num(r.forward_required),
                "forward_ok": r.forward_ok,
                "backward_total": num(r.backward_total),
                "backward_required": num(r.backward_required),
                "backward_ok": r.backward_ok,
                "min_copies_forward": r.min_copies_forward,
                "impossible_for_all_n": r.impossible_for_all_n,
            })))
        }
        Command::Cool { name, gap, nmax } => {
            let o = objects.classical(name)?;
            let seq = temperature_sequence(&o, *gap, *nmax, &caps, &units)?;
            let stein = stein_limit(&o, *gap, &units)?;
            let rows = seq
                .iter()
                .map(|s| {
                    vec![
                        json!(s.n),
                        num(s.temperature),
                        num(s.scaled),
                        num(stein.limit),
                    ]
                })
                .collect();
            let mut meta = Map::new();
            meta.insert("stein_exponent".into(), num(stein.exponent));
            meta.insert("stein_limit".into(), num(stein.limit));
            Ok(Report::Table {
                columns: vec!["n", "T_n", "nkT_n", "stein_limit"],
                rows,
                meta,
            })
        }
        Command::Shellsort {
            name,
            qubit_gap,
            qubit_beta,
            samples,
        } => {
            let o = objects.get(name)?;
            let q = Qubit::thermal(*qubit_gap, *qubit_beta, objects.beta)?;
            let s = optimal_shell_sort(&o, &q, &caps)?;
            let qubit = |q: &Qubit| json!({"lower": num(q.lower), "upper": num(q.upper)});
            let mut doc = json!({
                "before": qubit(&s.before),
                "after": qubit(&s.after),
                "permutation": s.permutation,
            });
            if *samples > 0 {
                let g = o.to_classical()?.g().to_vec();
                doc["sampled"] = sample_allowed(&s.joint, &g, &q, *samples, config.seed)?;
            }
            Ok(Report::Doc(doc))
        }
        Command::ErasureSim { pair, n } => {
            let a = objects.classical(&pair.from)?;
            let b = objects.classical(&pair.to)?;
            let w = conversion_feasible(&a, &b)?;
            let Some(m) = w.matrix else {
                return Err(Failure::solver(format!(
                    "'{}' does not convert into '{}'; nothing to simulate",
                    pair.from, pair.to
                )));
            };
            let mut ns = n.clone();
            ns.sort_unstable();
            let rows = convergence_report(&m, &a, &b, &ns, &caps)?
                .iter()
                .map(|r| vec![json!(r.n), num(r.tv_distance), num(r.ratio_diagnostic)])
                .collect();
            Ok(Report::Table {
                columns: vec!["n", "tv_distance", "ratio_diagnostic"],
                rows,
                meta: Map::new(),
            })
        }
        Command::Geometry { name, gap, copies } => {
            let o = objects.classical(name)?;
            let beta = o.beta();
            let vectors: Vec<Value> = deviation_vectors(&o)?
                .iter()
                .map(|v| {
                    json!({
                        "i": v.i,
                        "j": v.j,
                        "x": num(v.x),
                        "y": num(v.y),
                        "relative_beta": num(v.relative_beta()),
                        "projection": num(v.deviation_projection(beta)),
                    })
                })
                .collect();
            let mut doc = json!({
                "beta": num(beta),
                "deviation": num(max_diag_deviation(&o.clone().into()).value),
                "vectors": vectors,
            });
            if let Some(e) = gap {
                let r = achievable_relative_betas(&o, *copies, *e, 1e-9 * e.abs(), &caps)?;
                doc["achievable"] = json!({
                    "copies": copies,
                    "gap": num(*e),
                    "values": nums(&r.values),
                    "max": r.max.map(num),
                });
            }
            Ok(Report::Doc(doc))
        }
    }
}

/// Largest gain in lower-level population over seeded random unitaries that
/// commute with the joint equilibrium state.
fn sample_allowed(
    joint: &[f64],
    g: &[f64],
    q: &Qubit,
    samples: usize,
    seed: u64,
) -> Result<Value, Failure> {
    let equilibrium = kron(&diag(g), &diag(&gibbs_distribution(&[0.0, q.gap], q.beta)));
    let shells = SpectralDecomposition::of(&equilibrium);
    let axis = qubit_axis(g.len());
    let alpha = diag(joint);
    let value = |m: &CMatrix| (m * &axis).trace().re / 2.0;
    let base = value(&alpha);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_gain = (0..samples)
        .map(|_| {
            let u = random_allowed_unitary(&shells, &mut rng);
            value(&(&u * &alpha * u.adjoint())) - base
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(json!({
        "samples": samples,
        "seed": seed,
        "optimal": optimality_check(&alpha, &shells, &axis)?,
        "max_gain": num(max_gain),
    }))
}

fn witness_json(w: &ConversionWitness) -> Value {
    json!({
        "feasible": w.feasible,
        "matrix": w.matrix.as_ref().map(|m| m.to_rows().iter().map(|r| nums(r)).collect::<Vec<_>>()),
        "residual": num(w.residual),
        "phase_one_objective": num(w.phase_one_objective),
    })
}
