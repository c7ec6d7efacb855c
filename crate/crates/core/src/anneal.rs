//! Repeated-measurement annealing with a classical best-so-far buffer, and a
//! Metropolis simulated-annealing baseline on the same tours.

use std::fmt::Write as _;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmt::sig12;
use crate::instance::TspInstance;
use crate::resources::estimate_resources;
use crate::statevector::{prepare_tour_superposition, Backend, OutcomeTable};
use crate::tours::{check_enumerable, optimal_tours, tour_distance, Tour, TIE_TOLERANCE};

const QUANTUM_STREAM: u64 = 0;
const METROPOLIS_STREAM: u64 = 1;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantumAnnealOptions {
    pub max_trials: usize,
    /// Stop at the first sample within tie tolerance of this distance.
    /// Only meaningful when the optimum is known (benchmark mode).
    pub target: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    /// 1-based trial number.
    pub index: usize,
    /// Post-selection succeeded.
    pub ok: bool,
    pub tour: Option<Tour>,
    pub distance: Option<f64>,
    /// Best distance seen so far, after this trial.
    pub best: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnealRun {
    pub seed: u64,
    pub trials: Vec<TrialRecord>,
    pub best: Option<Tour>,
    pub best_distance: Option<f64>,
    pub trial_count: usize,
    pub success_count: usize,
    /// Trial at which the target distance was first sampled.
    pub first_target_trial: Option<usize>,
}

impl AnnealRun {
    /// `t=<i> ok=<0|1> tour=<tour|-> D=<value|-> best=<value|->`, one line per trial.
    pub fn log(&self) -> String {
        let mut out = String::new();
        for t in &self.trials {
            let _ = writeln!(
                out,
                "t={} ok={} tour={} D={} best={}",
                t.index,
                u8::from(t.ok),
                t.tour.as_ref().map_or("-".to_string(), Tour::to_string),
                t.distance.map_or("-".to_string(), sig12),
                t.best.map_or("-".to_string(), sig12),
            );
        }
        out
    }
}

/// The biased, projected circuit for one instance. Every trial re-runs the
/// same deterministic circuit, so its post-selection probability and output
/// table are computed once and each trial only draws fresh outcomes.
#[derive(Debug, Clone)]
pub struct QuantumTrialSampler {
    inst: TspInstance,
    success_probability: f64,
    table: OutcomeTable,
}

impl QuantumTrialSampler {
    pub fn new(inst: &TspInstance) -> Result<Self> {
        let mut state = prepare_tour_superposition(inst.n(), Backend::Tour)?;
        state.apply_bias_gates(inst)?;
        let projection = state.project_valid()?;
        Ok(Self {
            inst: inst.clone(),
            success_probability: projection.success_probability,
            table: state.outcome_table()?,
        })
    }

    pub fn success_probability(&self) -> f64 {
        self.success_probability
    }

    /// One prepare/bias/project/measure cycle. `None` when post-selection fails.
    pub fn trial<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Tour> {
        if rng.gen::<f64>() >= self.success_probability {
            return None;
        }
        Some(self.table.tours()[self.table.index_for(rng.gen::<f64>())].clone())
    }

    pub fn run<R: Rng + ?Sized>(
        &self,
        opts: &QuantumAnnealOptions,
        rng: &mut R,
        seed: u64,
    ) -> Result<AnnealRun> {
        if opts.max_trials == 0 {
            return Err(Error::InvalidArgument("max_trials must be at least 1".into()));
        }
        let mut run = AnnealRun {
            seed,
            trials: Vec::new(),
            best: None,
            best_distance: None,
            trial_count: 0,
            success_count: 0,
            first_target_trial: None,
        };
        for index in 1..=opts.max_trials {
            let sample = self.trial(rng);
            let distance = match &sample {
                Some(t) => Some(tour_distance(&self.inst, t)?),
                None => None,
            };
            if let (Some(t), Some(d)) = (&sample, distance) {
                run.success_count += 1;
                if run.best_distance.is_none_or(|b| d < b) {
                    run.best_distance = Some(d);
                    run.best = Some(t.clone());
                }
            }
            let hit = matches!((distance, opts.target), (Some(d), Some(target)) if d <= target + TIE_TOLERANCE);
            run.trials.push(TrialRecord {
                index,
                ok: sample.is_some(),
                tour: sample,
                distance,
                best: run.best_distance,
            });
            run.trial_count = index;
            if hit {
                run.first_target_trial = Some(index);
                break;
            }
        }
        Ok(run)
    }
}

pub fn run_quantum_annealing(inst: &TspInstance, max_trials: usize, seed: u64) -> Result<AnnealRun> {
    run_quantum_annealing_with(
        inst,
        &QuantumAnnealOptions {
            max_trials,
            target: None,
        },
        seed,
    )
}

pub fn run_quantum_annealing_with(
    inst: &TspInstance,
    opts: &QuantumAnnealOptions,
    seed: u64,
) -> Result<AnnealRun> {
    if opts.max_trials == 0 {
        return Err(Error::InvalidArgument("max_trials must be at least 1".into()));
    }
    QuantumTrialSampler::new(inst)?.run(opts, &mut rng_for(seed, QUANTUM_STREAM), seed)
}

/// Inverse-temperature schedule over step `t = 1, 2, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Schedule {
    /// Temperature `c / ln(1 + t)`, i.e. `beta = ln(1 + t) / c`.
    Logarithmic { c: f64 },
    /// Temperature `r^t / beta0`, i.e. `beta = beta0 * r^-t`.
    Geometric { beta0: f64, r: f64 },
    Constant { beta: f64 },
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Schedule::Logarithmic { c } => c.is_finite() && c > 0.0,
            Schedule::Geometric { beta0, r } => beta0.is_finite() && beta0 > 0.0 && r > 0.0 && r < 1.0,
            Schedule::Constant { beta } => beta >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid schedule {self:?}")))
        }
    }

    pub fn beta(&self, t: u64) -> f64 {
        match *self {
            Schedule::Logarithmic { c } => (t as f64).ln_1p() / c,
            Schedule::Geometric { beta0, r } => beta0 * r.powf(-(t as f64)),
            Schedule::Constant { beta } => beta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetropolisOptions {
    pub steps: u64,
    pub schedule: Schedule,
    /// Record the step at which this distance is first reached.
    pub target: Option<f64>,
    /// Count visits per tour rank after every step.
    pub record_occupancy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetropolisRun {
    pub seed: u64,
    pub steps: u64,
    pub schedule: Schedule,
    pub start: Tour,
    pub final_tour: Tour,
    pub final_distance: f64,
    pub best: Tour,
    pub best_distance: f64,
    pub accepted: u64,
    pub acceptance_rate: f64,
    pub uphill_proposed: u64,
    pub uphill_accepted: u64,
    /// `(step, best distance so far)` at roughly 100 evenly spaced steps.
    pub checkpoints: Vec<(u64, f64)>,
    pub first_target_step: Option<u64>,
    #[serde(skip)]
    pub occupancy: Option<Vec<u64>>,
}

pub fn run_metropolis(inst: &TspInstance, steps: u64, schedule: Schedule, seed: u64) -> Result<MetropolisRun> {
    run_metropolis_with(
        inst,
        &MetropolisOptions {
            steps,
            schedule,
            target: None,
            record_occupancy: false,
        },
        seed,
    )
}

pub fn run_metropolis_with(inst: &TspInstance, opts: &MetropolisOptions, seed: u64) -> Result<MetropolisRun> {
    metropolis_with_rng(inst, opts, seed, &mut rng_for(seed, METROPOLIS_STREAM))
}

/// Metropolis over fixed-start tours with the transposition of two non-start
/// positions as the move. Proposals are symmetric, so with a constant
/// schedule the chain targets the Gibbs distribution `exp(-beta D) / Z`.
pub fn metropolis_with_rng<R: RngCore>(
    inst: &TspInstance,
    opts: &MetropolisOptions,
    seed: u64,
    rng: &mut R,
) -> Result<MetropolisRun> {
    if opts.steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    opts.schedule.validate()?;
    let n = inst.n();
    let mut occupancy = if opts.record_occupancy {
        check_enumerable(n)?;
        Some(vec![0u64; crate::tours::tour_count(n)])
    } else {
        None
    };

    let mut order: Vec<usize> = (0..n).collect();
    for i in (2..n).rev() {
        let j = rng.gen_range(1..=i);
        order.swap(i, j);
    }
    let start = Tour::new(order.clone())?;
    let cycle_length = |o: &[usize]| -> f64 { (0..n).map(|j| inst.distance(o[j], o[(j + 1) % n])).sum() };

    let mut current = cycle_length(&order);
    let mut best = current;
    let mut best_order = order.clone();
    let hit = |d: f64| opts.target.is_some_and(|t| d <= t + TIE_TOLERANCE);
    let mut first_target_step = hit(current).then_some(0);
    let (mut accepted, mut uphill_proposed, mut uphill_accepted) = (0u64, 0u64, 0u64);
    let every = (opts.steps / 100).max(1);
    let mut checkpoints = Vec::new();

    for step in 1..=opts.steps {
        let i = rng.gen_range(1..n);
        let mut j = rng.gen_range(1..n - 1);
        if j >= i {
            j += 1;
        }
        order.swap(i, j);
        let proposed = cycle_length(&order);
        let delta = proposed - current;
        let accept = if delta <= 0.0 {
            true
        } else {
            uphill_proposed += 1;
            let beta = opts.schedule.beta(step);
            let take = rng.gen::<f64>() < (-beta * delta).exp();
            uphill_accepted += u64::from(take);
            take
        };
        if accept {
            accepted += 1;
            current = proposed;
            if current < best {
                best = current;
                best_order.copy_from_slice(&order);
            }
            if first_target_step.is_none() && hit(current) {
                first_target_step = Some(step);
            }
        } else {
            order.swap(i, j);
        }
        if let Some(occ) = occupancy.as_mut() {
            occ[Tour::new(order.clone())?.rank()] += 1;
        }
        if step % every == 0 || step == opts.steps {
            checkpoints.push((step, best));
        }
    }

    Ok(MetropolisRun {
        seed,
        steps: opts.steps,
        schedule: opts.schedule,
        start,
        final_tour: Tour::new(order)?,
        final_distance: current,
        best: Tour::new(best_order)?,
        best_distance: best,
        accepted,
        acceptance_rate: accepted as f64 / opts.steps as f64,
        uphill_proposed,
        uphill_accepted,
        checkpoints,
        first_target_step,
        occupancy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompareBudget {
    pub quantum_trials: usize,
    pub metropolis_steps: u64,
    pub schedule: Schedule,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: &'static str,
    pub budget: u64,
    pub runs: usize,
    pub hits: usize,
    pub hit_rate: f64,
    /// Mean trials (quantum) or steps (Metropolis) to the first optimal
    /// sample, over runs that hit.
    pub mean_to_optimum: Option<f64>,
    /// Runs that exhausted the budget without reaching the optimum.
    pub censored: usize,
    pub mean_best_distance: Option<f64>,
    /// Analytic expectation of `mean_to_optimum`, where one exists.
    pub theoretical_to_optimum: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub optimal_distance: f64,
    pub seeds: Vec<u64>,
    pub quantum: MethodSummary,
    pub metropolis: MethodSummary,
}

impl Comparison {
    pub fn to_text(&self) -> String {
        let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3}"));
        let mut out = String::new();
        let _ = writeln!(out, "optimal distance {}  runs {}", sig12(self.optimal_distance), self.seeds.len());
        let _ = writeln!(
            out,
            "{:<11} {:>10} {:>6} {:>9} {:>16} {:>9} {:>10} {:>12}",
            "method", "budget", "hits", "hit_rate", "mean_to_optimum", "censored", "mean_best", "theoretical"
        );
        for m in [&self.quantum, &self.metropolis] {
            let _ = writeln!(
                out,
                "{:<11} {:>10} {:>6} {:>9.3} {:>16} {:>9} {:>10} {:>12}",
                m.method,
                m.budget,
                m.hits,
                m.hit_rate,
                opt(m.mean_to_optimum),
                m.censored,
                opt(m.mean_best_distance),
                opt(m.theoretical_to_optimum),
            );
        }
        out
    }
}

fn summarize(
    method: &'static str,
    budget: u64,
    runs: usize,
    outcomes: &[(Option<u64>, Option<f64>)],
    theoretical: Option<f64>,
) -> MethodSummary {
    let firsts: Vec<f64> = outcomes.iter().filter_map(|o| o.0).map(|x| x as f64).collect();
    let bests: Vec<f64> = outcomes.iter().filter_map(|o| o.1).collect();
    let mean = |xs: &[f64]| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
    MethodSummary {
        method,
        budget,
        runs,
        hits: firsts.len(),
        hit_rate: if runs == 0 { 0.0 } else { firsts.len() as f64 / runs as f64 },
        mean_to_optimum: mean(&firsts),
        censored: runs - firsts.len(),
        mean_best_distance: mean(&bests),
        theoretical_to_optimum: theoretical,
    }
}

/// Runs both methods once per seed with the optimum (from brute force) as
/// the stop target. A zero budget reports the method as fully censored.
pub fn compare(inst: &TspInstance, budget: &CompareBudget, seeds: &[u64]) -> Result<Comparison> {
    budget.schedule.validate()?;
    let optimum = optimal_tours(inst)?.distance;
    let theory = estimate_resources(inst)?.expected_repeats_to_optimum;
    let sampler = QuantumTrialSampler::new(inst)?;

    let quantum: Vec<(Option<u64>, Option<f64>)> = if budget.quantum_trials == 0 {
        vec![(None, None); seeds.len()]
    } else {
        let opts = QuantumAnnealOptions {
            max_trials: budget.quantum_trials,
            target: Some(optimum),
        };
        seeds
            .par_iter()
            .map(|&s| {
                let run = sampler.run(&opts, &mut rng_for(s, QUANTUM_STREAM), s)?;
                Ok((run.first_target_trial.map(|t| t as u64), run.best_distance))
            })
            .collect::<Result<_>>()?
    };

    let metropolis: Vec<(Option<u64>, Option<f64>)> = if budget.metropolis_steps == 0 {
        vec![(None, None); seeds.len()]
    } else {
        let opts = MetropolisOptions {
            steps: budget.metropolis_steps,
            schedule: budget.schedule,
            target: Some(optimum),
            record_occupancy: false,
        };
        seeds
            .par_iter()
            .map(|&s| {
                let run = run_metropolis_with(inst, &opts, s)?;
                Ok((run.first_target_step, Some(run.best_distance)))
            })
            .collect::<Result<_>>()?
    };

    Ok(Comparison {
        optimal_distance: optimum,
        seeds: seeds.to_vec(),
        quantum: summarize("quantum", budget.quantum_trials as u64, seeds.len(), &quantum, Some(theory)),
        metropolis: summarize("metropolis", budget.metropolis_steps, seeds.len(), &metropolis, None),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::gibbs_distribution;
    use crate::instance::{four_city_example, random_instance};
    use crate::stats::total_variation;

    /// Always returns the largest word, so every uniform draw is just below 1.
    struct AlwaysHigh;

    impl RngCore for AlwaysHigh {
        fn next_u32(&mut self) -> u32 {
            u32::MAX
        }
        fn next_u64(&mut self) -> u64 {
            u64::MAX
        }
        fn fill_bytes(&mut self, dest: &mut [u8]) {
            dest.fill(0xFF);
        }
        fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
            self.fill_bytes(dest);
            Ok(())
        }
    }

    #[test]
    fn forced_failure_records_empty_trial() {
        let sampler = QuantumTrialSampler::new(&four_city_example()).unwrap();
        let opts = QuantumAnnealOptions {
            max_trials: 1,
            target: None,
        };
        let run = sampler.run(&opts, &mut AlwaysHigh, 0).unwrap();
        assert_eq!(run.trial_count, 1);
        assert!(run.best.is_none() && run.best_distance.is_none());
        assert!(!run.trials[0].ok);
        assert_eq!(run.log(), "t=1 ok=0 tour=- D=- best=-\n");
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(matches!(
            run_quantum_annealing(&four_city_example(), 0, 1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn quantum_run_success_rate_and_best() {
        let run = run_quantum_annealing(&four_city_example(), 2000, 17).unwrap();
        assert_eq!(run.trial_count, 2000);
        let rate = run.success_count as f64 / 2000.0;
        assert!((rate - 0.0519).abs() <= 0.015, "rate {rate}");
        assert!((run.best_distance.unwrap() - 2.7).abs() <= 1e-12);
        let mut last = f64::INFINITY;
        for t in &run.trials {
            if let Some(b) = t.best {
                assert!(b <= last);
                last = b;
            }
        }
        let best_sample = run
            .trials
            .iter()
            .filter_map(|t| t.distance)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(run.best_distance, Some(best_sample));
    }

    #[test]
    fn quantum_run_is_deterministic_and_stops_at_target() {
        let inst = four_city_example();
        let opts = QuantumAnnealOptions {
            max_trials: 100_000,
            target: Some(2.7),
        };
        let a = run_quantum_annealing_with(&inst, &opts, 5).unwrap();
        assert_eq!(a, run_quantum_annealing_with(&inst, &opts, 5).unwrap());
        let hit = a.first_target_trial.unwrap();
        assert_eq!(a.trial_count, hit);
        assert!(a.trials.last().unwrap().ok);
    }

    #[test]
    fn log_line_format() {
        let run = run_quantum_annealing(&four_city_example(), 200, 3).unwrap();
        let log = run.log();
        assert_eq!(log.lines().count(), 200);
        let ok_line = log.lines().find(|l| l.contains("ok=1")).unwrap();
        assert!(ok_line.contains("tour=(1)"));
        assert!(!ok_line.contains("D=-"));
    }

    #[test]
    fn schedule_validation() {
        assert!(Schedule::Logarithmic { c: 0.0 }.validate().is_err());
        assert!(Schedule::Geometric { beta0: 1.0, r: 1.0 }.validate().is_err());
        assert!(Schedule::Geometric { beta0: 1.0, r: 0.0 }.validate().is_err());
        assert!(Schedule::Constant { beta: -1.0 }.validate().is_err());
        assert!(Schedule::Constant { beta: f64::INFINITY }.validate().is_ok());
        assert!(run_metropolis(&four_city_example(), 0, Schedule::Constant { beta: 1.0 }, 1).is_err());
    }

    #[test]
    fn schedules_increase_inverse_temperature() {
        let log = Schedule::Logarithmic { c: 2.0 };
        assert!((log.beta(1) - 2f64.ln() / 2.0).abs() < 1e-15);
        assert!(log.beta(1000) > log.beta(10));
        let geo = Schedule::Geometric { beta0: 0.5, r: 0.9 };
        assert!(geo.beta(10) > geo.beta(1));
    }

    #[test]
    fn zero_beta_accepts_everything() {
        let run = run_metropolis(&four_city_example(), 10_000, Schedule::Constant { beta: 0.0 }, 4).unwrap();
        assert_eq!(run.acceptance_rate, 1.0);
        assert_eq!(run.uphill_accepted, run.uphill_proposed);
    }

    #[test]
    fn large_beta_is_greedy_descent() {
        let inst = random_instance(7, 2).unwrap();
        for seed in 0..5 {
            let hot = run_metropolis(&inst, 5000, Schedule::Constant { beta: 50.0 }, seed).unwrap();
            let greedy = run_metropolis(&inst, 5000, Schedule::Constant { beta: f64::INFINITY }, seed).unwrap();
            assert!((hot.uphill_accepted as f64) / (hot.uphill_proposed as f64) < 1e-2);
            if hot.uphill_accepted == 0 {
                assert_eq!(hot.final_tour, greedy.final_tour);
                assert_eq!(hot.best_distance, greedy.best_distance);
            }
            assert_eq!(greedy.uphill_accepted, 0);
            let cps: Vec<f64> = greedy.checkpoints.iter().map(|c| c.1).collect();
            assert!(cps.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn metropolis_deterministic_and_finds_example_optimum() {
        let inst = four_city_example();
        let s = Schedule::Logarithmic { c: 1.0 };
        let a = run_metropolis(&inst, 20_000, s, 9).unwrap();
        assert_eq!(a, run_metropolis(&inst, 20_000, s, 9).unwrap());
        assert!((a.best_distance - 2.7).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&a.acceptance_rate));
        assert_eq!(a.checkpoints.last().unwrap().0, 20_000);
    }

    #[test]
    fn constant_beta_chain_samples_gibbs() {
        let inst = four_city_example();
        let opts = MetropolisOptions {
            steps: 200_000,
            schedule: Schedule::Constant { beta: 1.0 },
            target: None,
            record_occupancy: true,
        };
        let run = run_metropolis_with(&inst, &opts, 21).unwrap();
        let occ = run.occupancy.unwrap();
        let empirical: Vec<f64> = occ.iter().map(|&c| c as f64 / 200_000.0).collect();
        let exact = gibbs_distribution(&inst).unwrap();
        assert!(total_variation(&empirical, exact.probabilities()) < 0.02);
    }

    #[test]
    fn compare_quantum_column() {
        let inst = four_city_example();
        let budget = CompareBudget {
            quantum_trials: 100_000,
            metropolis_steps: 10_000,
            schedule: Schedule::Logarithmic { c: 1.0 },
        };
        let seeds: Vec<u64> = (0..30).collect();
        let table = compare(&inst, &budget, &seeds).unwrap();
        let mean = table.quantum.mean_to_optimum.unwrap();
        assert!((mean - 44.6).abs() <= 25.0, "mean {mean}");
        assert_eq!(table.quantum.hits, 30);
        assert!((table.quantum.theoretical_to_optimum.unwrap() - 44.64).abs() < 0.1);
        assert_eq!(table, compare(&inst, &budget, &seeds).unwrap());
        assert!(table.to_text().contains("quantum"));
    }

    #[test]
    fn compare_zero_budget_is_censored() {
        let inst = four_city_example();
        let budget = CompareBudget {
            quantum_trials: 0,
            metropolis_steps: 1000,
            schedule: Schedule::Logarithmic { c: 1.0 },
        };
        let table = compare(&inst, &budget, &[1, 2, 3]).unwrap();
        assert_eq!(table.quantum.censored, 3);
        assert_eq!(table.quantum.hits, 0);
        assert_eq!(table.quantum.mean_to_optimum, None);
        assert_eq!(table.metropolis.runs, 3);
    }
}
