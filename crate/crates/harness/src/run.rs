//! Subcommand implementations. Each returns tables; nothing here touches the disk.

use anyhow::{anyhow, bail, Result};
use rayon::prelude::*;

use noma_oqc::alloc::{
    allocate_sca, baseline_enp, baseline_ia, baseline_oma, interference_noise, PowerAllocation, PowerConstraints,
};
use noma_oqc::channel::{stream_rng, ChannelParams, ChannelRealization};
use noma_oqc::coherent::{DetectionConfig, ReceiverVariant, UserSignal};
use noma_oqc::poisson::DEFAULT_TAIL_EPS;
use noma_oqc::rate::{
    bounds_and_asymptotic, equiprobable_information, exact_sum_rate, holevo_binary, holevo_capacity, oma_point,
    reference_capacities, two_user_region, GaussianObjective, ENUMERATION_CAP,
};
use noma_oqc::sampler::allocate_sampled;
use noma_oqc::srm::{qam_sum_rate, QamConstellation, QamGains};

use crate::output::{num, opt, RunOutput, Table};
use crate::scenario::{parse_grid, parse_receiver, Scenario};

/// Offset separating sampler streams from channel streams.
const SAMPLER_STREAM_BASE: u64 = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    /// Full enumeration up to `full_enumeration_max` users, sampled above.
    Sca,
    Sampled,
    Oma,
    Enp,
    Ia,
}

impl Algorithm {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "sca" => Self::Sca,
            "sampled" => Self::Sampled,
            "oma" => Self::Oma,
            "enp" => Self::Enp,
            "ia" => Self::Ia,
            _ => bail!("unknown algorithm `{name}`; expected sca, sampled, oma, enp or ia"),
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Sca => "sca",
            Self::Sampled => "sampled",
            Self::Oma => "oma",
            Self::Enp => "enp",
            Self::Ia => "ia",
        }
    }
}

/// One allocation and its rates under each requested receiver.
#[derive(Clone, Debug)]
pub struct SchemeRun {
    pub method: &'static str,
    pub allocation: PowerAllocation<f64>,
    /// Rate reported by the scheme, per receiver, bits.
    pub rates: Vec<Option<f64>>,
    /// Full-enumeration asymptotic sum-rate at the allocation.
    pub asymptotic: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_residual: Option<f64>,
    pub newton_steps: usize,
    pub trace: Vec<f64>,
    pub warnings: Vec<String>,
}

fn single_user_rate(amplitude: f64, det: &DetectionConfig<f64>) -> Result<f64> {
    Ok(equiprobable_information(&[0.0, amplitude], det, DEFAULT_TAIL_EPS)?)
}

fn sum_rate(amps: &[f64], det: &DetectionConfig<f64>) -> Result<Option<f64>> {
    if amps.len() > ENUMERATION_CAP {
        return Ok(None);
    }
    Ok(Some(exact_sum_rate(
        &UserSignal::from_amplitudes(amps)?,
        det,
        DEFAULT_TAIL_EPS,
    )?))
}

fn asymptotic_at(amps: &[f64], det: &DetectionConfig<f64>) -> Result<Option<f64>> {
    if amps.len() > ENUMERATION_CAP || det.n_b() <= 0.0 {
        return Ok(None);
    }
    Ok(Some(GaussianObjective::full(amps.len(), det)?.value(amps)?))
}

/// Runs `algorithm` and rates the allocation under every receiver in `receivers`.
pub fn run_scheme(
    scenario: &Scenario,
    algorithm: Algorithm,
    det: &DetectionConfig<f64>,
    receivers: &[ReceiverVariant],
    constraints: &PowerConstraints<f64>,
    gains: &[f64],
    sampler_stream: u64,
) -> Result<SchemeRun> {
    let users = constraints.users();
    let cfg = scenario.solver_config();
    let ideal = det.with_receiver(ReceiverVariant::IdealPnrd)?;
    let mut run = SchemeRun {
        method: algorithm.label(),
        allocation: baseline_enp(constraints),
        rates: Vec::new(),
        asymptotic: None,
        iterations: 0,
        converged: true,
        kkt_residual: None,
        newton_steps: 0,
        trace: Vec::new(),
        warnings: Vec::new(),
    };
    let use_sampler = match algorithm {
        Algorithm::Sampled => true,
        Algorithm::Sca => users > scenario.solver.full_enumeration_max,
        _ => false,
    };
    match algorithm {
        Algorithm::Sca | Algorithm::Sampled if use_sampler => {
            let scfg = scenario.sampler_config(users);
            let mut rng = stream_rng(scenario.seed, sampler_stream);
            let out = allocate_sampled(&ideal, constraints, gains, &cfg, &scfg, &mut rng)?;
            run.method = "sampled";
            run.warnings = out.warnings.clone();
            run.iterations = out.sca.iterations;
            run.converged = out.sca.converged;
            run.kkt_residual = Some(out.sca.kkt_residual);
            run.newton_steps = out.sca.newton_steps;
            run.trace = out.sca.trace.clone();
            run.allocation = out.sca.allocation;
        }
        Algorithm::Sca | Algorithm::Sampled => {
            let out = allocate_sca(&ideal, constraints, gains, &cfg)?;
            run.method = "full";
            if !out.subproblems_converged {
                run.warnings.push("a subproblem hit the Newton step cap".into());
            }
            run.iterations = out.iterations;
            run.converged = out.converged;
            run.kkt_residual = Some(out.kkt_residual);
            run.newton_steps = out.newton_steps;
            run.trace = out.trace.clone();
            run.allocation = out.allocation;
        }
        Algorithm::Enp => {}
        Algorithm::Oma => run.allocation = baseline_oma(&ideal, constraints, gains)?.0,
        Algorithm::Ia => run.allocation = baseline_ia(&ideal, constraints, gains, &cfg)?.0,
    }
    let amps = run.allocation.amplitudes();
    for &rx in receivers {
        let d = det.with_receiver(rx)?;
        let rate = match algorithm {
            Algorithm::Oma => {
                let mut total = 0.0;
                for &a in &amps {
                    total += single_user_rate(a, &d)?;
                }
                Some(total / users as f64)
            }
            Algorithm::Ia => {
                let mut total = 0.0;
                for (&a, &n) in amps.iter().zip(&interference_noise(&amps, &d)) {
                    total += single_user_rate(a, &d.with_noise(n)?)?;
                }
                Some(total)
            }
            _ => sum_rate(&amps, &d)?,
        };
        run.rates.push(rate);
    }
    run.asymptotic = asymptotic_at(&amps, &ideal)?;
    Ok(run)
}

/// Channel gains of realization `r` for the first `users` users.
pub fn draw_gains(scenario: &Scenario, users: usize, realization: usize) -> Result<(Vec<f64>, Vec<String>)> {
    if let Some(g) = &scenario.channel.gains {
        if g.len() < users {
            bail!("channel.gains lists {} values for {users} users", g.len());
        }
        return Ok((g[..users].to_vec(), Vec::new()));
    }
    let ch = &scenario.channel;
    let sigma = ch.sigma_x.resolve(users, "channel.sigma_x")?;
    let dist = ch.distance.resolve(users, "channel.distance")?;
    let mut rng = stream_rng(scenario.seed, realization as u64);
    let mut gains = Vec::with_capacity(users);
    let mut warnings = Vec::new();
    for k in 0..users {
        let p = ChannelParams::new(sigma[k], dist[k], ch.tx_aperture, ch.rx_aperture, ch.wavelength)?;
        let r = ChannelRealization::draw(&p, &mut rng)?;
        if r.path_loss() > 1.0 {
            warnings.push(format!(
                "path loss {} > 1 for user {} at {} m (reported as computed)",
                r.path_loss(),
                k + 1,
                dist[k]
            ));
        }
        gains.push(r.gain());
    }
    Ok((gains, warnings))
}

fn receivers_of(scenario: &Scenario) -> Result<(Vec<String>, Vec<ReceiverVariant>)> {
    let names = if scenario.sweep.receivers.is_empty() {
        vec![scenario.system.receiver.clone()]
    } else {
        scenario.sweep.receivers.clone()
    };
    let variants = names.iter().map(|n| parse_receiver(n)).collect::<Result<Vec<_>>>()?;
    Ok((variants.iter().map(|v| v.label()).collect(), variants))
}

fn mean_and_stderr(xs: &[Option<f64>]) -> (Option<f64>, Option<f64>) {
    let vals: Vec<f64> = xs.iter().flatten().copied().collect();
    if vals.is_empty() || vals.len() != xs.len() {
        return (None, None);
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    if vals.len() < 2 {
        return (Some(mean), None);
    }
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some((var / n).sqrt()))
}

pub fn cmd_rate(scenario: &Scenario) -> Result<RunOutput> {
    let users = scenario.system.users;
    if users > ENUMERATION_CAP {
        bail!(
            "rate enumerates all 2^K configurations and supports at most {ENUMERATION_CAP} users; \
             use `allocate --algorithm sampled` for larger systems"
        );
    }
    let det = scenario.detection()?;
    let amps = match &scenario.system.amplitudes {
        Some(a) => a.clone(),
        None => baseline_enp(&scenario.constraints(users, scenario.system.max_bs_power)?).amplitudes(),
    };
    let signals = UserSignal::from_amplitudes(&amps)?;
    let (labels, variants) = receivers_of(scenario)?;
    let mut t = Table::new(
        "rate.csv",
        "rate/1",
        &[
            "receiver",
            "users",
            "eta",
            "n_b",
            "amplitude_sum",
            "exact",
            "lower_ga",
            "upper_ga",
            "asymptotic",
            "ordered",
            "bounds_swapped",
            "band_low",
            "band_high",
            "exact_in_band",
            "xi",
        ],
    );
    let mut out = RunOutput::default();
    for (label, rx) in labels.iter().zip(variants) {
        let d = det.with_receiver(rx)?;
        let exact = exact_sum_rate(&signals, &d, DEFAULT_TAIL_EPS)?;
        let (lower, upper, asym, ordered, swapped, xi) = if det.n_b() > 0.0 {
            let b = bounds_and_asymptotic(&signals, &det)?;
            (
                Some(b.lower_ga),
                Some(b.upper_ga),
                Some(b.asymptotic),
                Some(b.strictly_ordered()),
                Some(b.bounds_swapped),
                Some(b.xi_low),
            )
        } else {
            out.warnings
                .insert("Gaussian bounds need positive background noise; columns left empty".into());
            (None, None, None, None, None, None)
        };
        let band = asym.map(|a| (a - 0.1 * a.abs(), a + 0.1 * a.abs()));
        let flag = |b: Option<bool>| b.map(|v| v.to_string()).unwrap_or_default();
        t.push(vec![
            label.clone(),
            users.to_string(),
            num(det.eta()),
            num(det.n_b()),
            num(amps.iter().sum()),
            num(exact),
            opt(lower),
            opt(upper),
            opt(asym),
            flag(ordered),
            flag(swapped),
            opt(band.map(|b| b.0)),
            opt(band.map(|b| b.1)),
            flag(band.map(|(lo, hi)| exact >= lo && exact <= hi)),
            opt(xi),
        ]);
    }
    out.tables.push(t);
    Ok(out)
}

pub fn cmd_allocate(scenario: &Scenario) -> Result<RunOutput> {
    let users = scenario.system.users;
    let algorithm = Algorithm::parse(&scenario.solver.algorithm)?;
    let det = scenario.detection()?;
    let constraints = scenario.constraints(users, scenario.system.max_bs_power)?;
    let (labels, variants) = receivers_of(scenario)?;
    let mut out = RunOutput::default();
    let mut alloc = Table::new(
        "allocation.csv",
        "allocation/1",
        &["realization", "user", "gain", "max_user_power", "power", "amplitude"],
    );
    let mut summary = Table::new(
        "allocation_summary.csv",
        "allocation_summary/1",
        &[
            "realization",
            "algorithm",
            "method",
            "receiver",
            "rate",
            "asymptotic",
            "iterations",
            "converged",
            "kkt_residual",
            "newton_steps",
        ],
    );
    let mut trace = Table::new("trace.csv", "trace/1", &["realization", "iteration", "objective"]);
    type Realization = (Vec<f64>, Vec<String>, SchemeRun);
    let runs: Vec<Result<Realization>> = (0..scenario.channel.realizations)
        .into_par_iter()
        .map(|r| {
            let (gains, warnings) = draw_gains(scenario, users, r)?;
            let run = run_scheme(
                scenario,
                algorithm,
                &det,
                &variants,
                &constraints,
                &gains,
                SAMPLER_STREAM_BASE + r as u64,
            )?;
            Ok((gains, warnings, run))
        })
        .collect();
    for (r, res) in runs.into_iter().enumerate() {
        let (gains, warnings, run) = res?;
        out.warnings.extend(warnings);
        out.warnings
            .extend(run.warnings.iter().map(|w| format!("realization {r}: {w}")));
        let amps = run.allocation.amplitudes();
        for (k, &gain) in gains.iter().enumerate() {
            alloc.push(vec![
                r.to_string(),
                (k + 1).to_string(),
                num(gain),
                num(constraints.max_user_power()[k]),
                num(run.allocation.powers()[k]),
                num(amps[k]),
            ]);
        }
        for (label, rate) in labels.iter().zip(&run.rates) {
            summary.push(vec![
                r.to_string(),
                algorithm.label().into(),
                run.method.into(),
                label.clone(),
                opt(*rate),
                opt(run.asymptotic),
                run.iterations.to_string(),
                run.converged.to_string(),
                opt(run.kkt_residual),
                run.newton_steps.to_string(),
            ]);
        }
        for (i, v) in run.trace.iter().enumerate() {
            trace.push(vec![r.to_string(), i.to_string(), num(*v)]);
        }
    }
    out.tables.extend([alloc, summary, trace]);
    Ok(out)
}

struct PointResult {
    rows: Vec<Vec<String>>,
    traces: Vec<Vec<String>>,
    warnings: Vec<String>,
}

pub fn cmd_sweep(scenario: &Scenario) -> Result<RunOutput> {
    let grid = parse_grid(&scenario.sweep.grid)?;
    let by_users = scenario.sweep.param == "users";
    let algorithms = scenario
        .sweep
        .algorithms
        .iter()
        .map(|a| Algorithm::parse(a))
        .collect::<Result<Vec<_>>>()?;
    let etas = if scenario.sweep.etas.is_empty() {
        vec![scenario.system.eta]
    } else {
        scenario.sweep.etas.clone()
    };
    let (labels, variants) = receivers_of(scenario)?;
    let realizations = scenario.channel.realizations;
    let point_users = |v: f64| -> Result<usize> {
        if by_users {
            let k = v.round();
            if k < 1.0 || (k - v).abs() > 1e-9 {
                bail!("user grid value {v} is not a positive integer");
            }
            Ok(k as usize)
        } else {
            Ok(scenario.system.users)
        }
    };
    let results: Vec<Result<PointResult>> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let users = point_users(v)?;
            let bs = if by_users { scenario.system.max_bs_power } else { v };
            let constraints = scenario.constraints(users, bs)?;
            let mut res = PointResult {
                rows: Vec::new(),
                traces: Vec::new(),
                warnings: Vec::new(),
            };
            for (e, &eta) in etas.iter().enumerate() {
                let det = DetectionConfig::new(eta, scenario.system.n_b, ReceiverVariant::IdealPnrd)?;
                for (a, &alg) in algorithms.iter().enumerate() {
                    let mut runs = Vec::with_capacity(realizations);
                    for r in 0..realizations {
                        let (gains, w) = draw_gains(scenario, users, r)?;
                        res.warnings.extend(w);
                        let stream = SAMPLER_STREAM_BASE
                            + (((i * etas.len() + e) * algorithms.len() + a) * realizations + r) as u64;
                        let run = run_scheme(scenario, alg, &det, &variants, &constraints, &gains, stream)?;
                        res.warnings.extend(
                            run.warnings
                                .iter()
                                .map(|w| format!("{} = {v}, {}: {w}", scenario.sweep.param, alg.label())),
                        );
                        for (it, obj) in run.trace.iter().enumerate() {
                            res.traces.push(vec![
                                scenario.sweep.param.clone(),
                                num(v),
                                alg.label().into(),
                                num(eta),
                                r.to_string(),
                                it.to_string(),
                                num(*obj),
                            ]);
                        }
                        runs.push(run);
                    }
                    let (asym, asym_se) = mean_and_stderr(&runs.iter().map(|r| r.asymptotic).collect::<Vec<_>>());
                    let iterations = runs.iter().map(|r| r.iterations).sum::<usize>() as f64 / realizations as f64;
                    let converged = runs.iter().all(|r| r.converged);
                    for (x, label) in labels.iter().enumerate() {
                        let (rate, rate_se) = mean_and_stderr(&runs.iter().map(|r| r.rates[x]).collect::<Vec<_>>());
                        res.rows.push(vec![
                            scenario.sweep.param.clone(),
                            num(v),
                            users.to_string(),
                            alg.label().into(),
                            runs[0].method.into(),
                            num(eta),
                            label.clone(),
                            opt(rate),
                            opt(rate_se),
                            opt(asym),
                            opt(asym_se),
                            num(iterations),
                            converged.to_string(),
                            realizations.to_string(),
                        ]);
                    }
                }
            }
            Ok(res)
        })
        .collect();
    let mut out = RunOutput::default();
    let mut rows = Table::new(
        "sweep.csv",
        "sweep/1",
        &[
            "param",
            "value",
            "users",
            "algorithm",
            "method",
            "eta",
            "receiver",
            "rate_mean",
            "rate_stderr",
            "asymptotic_mean",
            "asymptotic_stderr",
            "iterations_mean",
            "converged",
            "realizations",
        ],
    );
    let mut traces = Table::new(
        "sweep_traces.csv",
        "sweep_traces/1",
        &[
            "param",
            "value",
            "algorithm",
            "eta",
            "realization",
            "iteration",
            "objective",
        ],
    );
    for r in results {
        let r = r?;
        rows.rows.extend(r.rows);
        traces.rows.extend(r.traces);
        out.warnings.extend(r.warnings);
    }
    out.tables.extend([rows, traces]);
    Ok(out)
}

pub fn cmd_region(scenario: &Scenario) -> Result<RunOutput> {
    if scenario.system.users != 2 {
        bail!(
            "region needs exactly two users, the scenario has {}",
            scenario.system.users
        );
    }
    let det = scenario.detection()?;
    let constraints = scenario.constraints(2, scenario.system.max_bs_power)?;
    let amps = match &scenario.system.amplitudes {
        Some(a) => a.clone(),
        None => baseline_enp(&constraints).amplitudes(),
    };
    let (gains, warnings) = draw_gains(scenario, 2, 0)?;
    let region = two_user_region(&amps, &det, DEFAULT_TAIL_EPS)?;
    let oma_amps = baseline_oma(&det, &constraints, &gains)?.0.amplitudes();
    let c = oma_point(&oma_amps, &det, DEFAULT_TAIL_EPS)?;
    let mut poly = Table::new("region.csv", "region/1", &["scheme", "label", "i1", "i2"]);
    let labels = ["user2_axis", "A", "B", "user1_axis"];
    for (label, (x, y)) in labels.iter().zip(region.polyline()) {
        poly.push(vec!["noma".into(), (*label).into(), num(x), num(y)]);
    }
    let oma = [
        ("user2_axis", (0.0, 2.0 * c.1)),
        ("C", c),
        ("user1_axis", (2.0 * c.0, 0.0)),
    ];
    for (label, (x, y)) in oma {
        poly.push(vec!["oma".into(), label.into(), num(x), num(y)]);
    }
    let mut summary = Table::new(
        "region_summary.csv",
        "region_summary/1",
        &[
            "amplitude_1",
            "amplitude_2",
            "i1_max",
            "i2_max",
            "i_sum",
            "a_line_error",
            "b_line_error",
            "c_dominated",
        ],
    );
    summary.push(vec![
        num(amps[0]),
        num(amps[1]),
        num(region.user1_max),
        num(region.user2_max),
        num(region.sum),
        num((region.a.0 + region.a.1 - region.sum).abs()),
        num((region.b.0 + region.b.1 - region.sum).abs()),
        region.dominates(c, 1e-12).to_string(),
    ]);
    let mut out = RunOutput::default();
    out.warnings.extend(warnings);
    out.tables.extend([poly, summary]);
    Ok(out)
}

pub fn cmd_limits(scenario: &Scenario) -> Result<RunOutput> {
    let det = scenario.detection()?;
    let mut t = Table::new(
        "limits.csv",
        "limits/1",
        &[
            "mean_photons",
            "holevo_bits",
            "sql_bits",
            "shannon_awgn_bits",
            "holevo_binary_bits",
            "gap_nats",
        ],
    );
    for n in parse_grid(&scenario.limits.grid)? {
        let received = det.eta() * n;
        let holevo = holevo_capacity(received)?;
        let (sql, awgn) = reference_capacities(n, &det, scenario.limits.awgn_noise_photons)?;
        t.push(vec![
            num(n),
            num(holevo),
            num(sql),
            num(awgn),
            num(holevo_binary(received)?),
            num((holevo - sql) * std::f64::consts::LN_2),
        ]);
    }
    let mut out = RunOutput::default();
    out.tables.push(t);
    Ok(out)
}

pub fn cmd_qam(scenario: &Scenario, order: Option<usize>) -> Result<RunOutput> {
    let q = &scenario.qam;
    let gains = match q.gains.as_str() {
        "uniform" => QamGains::Uniform,
        "nested" => QamGains::Nested,
        g => return Err(anyhow!("unknown QAM gain rule `{g}`")),
    };
    let orders = match order {
        Some(m) => vec![m],
        None => q.orders.clone(),
    };
    let grid = parse_grid(&q.grid)?;
    let jobs: Vec<(usize, f64)> = orders.iter().flat_map(|&m| grid.iter().map(move |&p| (m, p))).collect();
    let rows: Vec<Result<Vec<String>>> = jobs
        .par_iter()
        .map(|&(m, p)| {
            let c = QamConstellation::with_mean_photons(m, p / q.users as f64)?;
            let r = qam_sum_rate(&c, q.users, &gains)?;
            Ok(vec![
                m.to_string(),
                q.users.to_string(),
                q.gains.clone(),
                num(p),
                num(c.alpha()),
                num(r.bits),
                r.distinct_states.to_string(),
                r.floored_eigenvalues.to_string(),
            ])
        })
        .collect();
    let mut t = Table::new(
        "qam.csv",
        "qam/1",
        &[
            "order",
            "users",
            "gains",
            "total_photons",
            "alpha",
            "sum_rate_bits",
            "distinct_states",
            "floored_eigenvalues",
        ],
    );
    for r in rows {
        t.push(r?);
    }
    let mut out = RunOutput::default();
    out.tables.push(t);
    Ok(out)
}

/// Dispatch by subcommand name.
pub fn execute(command: &str, scenario: &Scenario, qam_order: Option<usize>) -> Result<RunOutput> {
    match command {
        "rate" => cmd_rate(scenario),
        "allocate" => cmd_allocate(scenario),
        "sweep" => cmd_sweep(scenario),
        "region" => cmd_region(scenario),
        "limits" => cmd_limits(scenario),
        "qam" => cmd_qam(scenario, qam_order),
        _ => bail!("unknown command `{command}`"),
    }
}
