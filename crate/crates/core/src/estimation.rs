//! Statistical layer: simulated photon detection with finite collection
//! efficiency, distribution-free correlator estimates from coincidence
//! counts, certified bound reports and sample-size planning.
//!
//! Incomplete detection triples are recorded (never silently dropped) but
//! only threefold coincidences enter the estimate; loss is modeled
//! independent of outcome, so the postselection is unbiased.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{BoundReport, Span};
use crate::densesim::Ensemble;
use crate::error::{Error, Result};
use crate::errormodel::{correlator_analytic, SourceParams};
use crate::pauli::{GeneratorSet, Pauli, PauliString};

/// Schema tag carried by every persisted record format.
pub const CLICK_SCHEMA: &str = "click/1";
/// Schema tag for serialized estimates and certified reports.
pub const ESTIMATE_SCHEMA: &str = "estimate/1";

/// Default certification confidence parameter (1 - confidence).
pub const DEFAULT_DELTA: f64 = 0.01;

/// Detection result for one photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
    Lost,
}

impl Outcome {
    fn to_char(self) -> char {
        match self {
            Outcome::Plus => '+',
            Outcome::Minus => '-',
            Outcome::Lost => 'L',
        }
    }

    fn from_char(c: char) -> Result<Self> {
        match c {
            '+' => Ok(Outcome::Plus),
            '-' => Ok(Outcome::Minus),
            'L' => Ok(Outcome::Lost),
            other => Err(Error::Parse(format!("invalid outcome '{other}'"))),
        }
    }
}

/// One measurement window: three adjacent photons measured in fixed bases.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ClickRecord {
    pub schema: String,
    pub trial_id: u64,
    /// Chain position of the first photon in the window.
    pub window_start: usize,
    /// Basis letters, one per photon ("ZXZ").
    pub settings: String,
    /// One value per photon; lost photons are recorded as lost.
    pub outcomes: Vec<Outcome>,
}

impl ClickRecord {
    /// All three photons detected.
    pub fn is_complete(&self) -> bool {
        self.outcomes.iter().all(|o| *o != Outcome::Lost)
    }

    /// Product of the detected outcomes (complete records only).
    fn product(&self) -> Option<f64> {
        self.is_complete().then(|| {
            self.outcomes
                .iter()
                .map(|o| if *o == Outcome::Plus { 1.0 } else { -1.0 })
                .product()
        })
    }

    fn outcome_string(&self) -> String {
        self.outcomes.iter().map(|o| o.to_char()).collect()
    }
}

/// Fixed measurement schedule: windows are drawn cyclically from
/// `window_starts`, each photon is detected independently with probability
/// `efficiency`, and the record stream is fully determined by `seed`.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentPlan {
    pub window_starts: Vec<usize>,
    pub efficiency: f64,
    pub windows: u64,
    pub seed: u64,
}

impl ExperimentPlan {
    pub fn new(
        window_starts: Vec<usize>,
        efficiency: f64,
        windows: u64,
        seed: u64,
    ) -> Result<Self> {
        if window_starts.is_empty() {
            return Err(Error::Domain("window cycle must be nonempty".into()));
        }
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(Error::Domain(format!(
                "efficiency {efficiency} outside (0, 1]"
            )));
        }
        if windows < 1 {
            return Err(Error::Domain("windows must be >= 1".into()));
        }
        Ok(ExperimentPlan {
            window_starts,
            efficiency,
            windows,
            seed,
        })
    }

    /// Every interior Z-X-Z window of an n-qubit chain, in chain order.
    pub fn full_cycle(n_qubits: usize, efficiency: f64, windows: u64, seed: u64) -> Result<Self> {
        if n_qubits < 3 {
            return Err(Error::Domain("chain must have at least 3 qubits".into()));
        }
        ExperimentPlan::new((0..n_qubits - 2).collect(), efficiency, windows, seed)
    }
}

/// What the simulated detectors are pointed at.
pub enum ClickSource<'a> {
    State(&'a Ensemble),
    Source(&'a SourceParams),
}

/// Probabilities of the eight outcome triples of a Z-X-Z window.
fn window_distribution(source: &ClickSource, window_start: usize) -> Result<[f64; 8]> {
    // correlators[subset] = expectation of the product of Z, X, Z over the
    // window positions selected by the subset bits.
    let correlators = match source {
        ClickSource::State(rho) => {
            let n = rho.n_qubits();
            check_window(n, window_start)?;
            let letters = [Pauli::Z, Pauli::X, Pauli::Z];
            let mut corr = [0.0; 8];
            for (subset, value) in corr.iter_mut().enumerate().skip(1) {
                let mut ls = vec![Pauli::I; n];
                for (pos, &letter) in letters.iter().enumerate() {
                    if subset >> pos & 1 == 1 {
                        ls[window_start + pos] = letter;
                    }
                }
                *value = rho.expectation(&PauliString::from_letters(&ls))?;
            }
            corr
        }
        ClickSource::Source(params) => {
            let n = params.chain_qubits();
            check_window(n, window_start)?;
            // The output is a mixture of stabilizer states sharing the
            // cluster group up to signs, so every marginal except the full
            // Z-X-Z product vanishes identically.
            let gens = GeneratorSet::cluster(n)?;
            let mut corr = [0.0; 8];
            corr[0b111] = correlator_analytic(gens.get(window_start + 1), params)?;
            corr
        }
    };
    let mut dist = [0.0; 8];
    for (idx, d) in dist.iter_mut().enumerate() {
        let mut p = 1.0;
        for (subset, value) in correlators.iter().enumerate().skip(1) {
            let sign: f64 = (0..3)
                .filter(|pos| subset >> pos & 1 == 1)
                .map(|pos| if idx >> pos & 1 == 1 { -1.0 } else { 1.0 })
                .product();
            p += sign * value;
        }
        *d = (p / 8.0).max(0.0);
    }
    let total: f64 = dist.iter().sum();
    debug_assert!(
        (total - 1.0).abs() < 1e-9,
        "window distribution sums to {total}"
    );
    for d in &mut dist {
        *d /= total;
    }
    Ok(dist)
}

fn check_window(n: usize, start: usize) -> Result<()> {
    if start + 2 >= n {
        return Err(Error::Domain(format!(
            "window at {start} does not fit a {n}-qubit chain"
        )));
    }
    Ok(())
}

/// Sample detection records for a Z-X-Z window schedule.
///
/// Outcomes follow the exact Born distribution of each window; each photon
/// is then detected with probability `plan.efficiency`, independently of
/// everything else. Identical seeds produce identical record streams.
pub fn simulate_clicks(source: &ClickSource, plan: &ExperimentPlan) -> Result<Vec<ClickRecord>> {
    let distributions: Vec<(usize, [f64; 8])> = plan
        .window_starts
        .iter()
        .map(|&w| window_distribution(source, w).map(|d| (w, d)))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha12Rng::seed_from_u64(plan.seed);
    let mut records = Vec::with_capacity(plan.windows as usize);
    for trial_id in 0..plan.windows {
        let (window_start, dist) = &distributions[(trial_id % distributions.len() as u64) as usize];
        let draw: f64 = rng.random();
        let mut acc = 0.0;
        let mut idx = 7;
        for (i, p) in dist.iter().enumerate() {
            acc += p;
            if draw < acc {
                idx = i;
                break;
            }
        }
        let outcomes: Vec<Outcome> = (0..3)
            .map(|pos| {
                let detected = rng.random::<f64>() < plan.efficiency;
                if !detected {
                    Outcome::Lost
                } else if idx >> pos & 1 == 1 {
                    Outcome::Minus
                } else {
                    Outcome::Plus
                }
            })
            .collect();
        records.push(ClickRecord {
            schema: CLICK_SCHEMA.to_string(),
            trial_id,
            window_start: *window_start,
            settings: "ZXZ".to_string(),
            outcomes,
        });
    }
    Ok(records)
}

/// Interval construction used by an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    /// Distribution-free; the certification interval.
    Hoeffding,
    /// Normal approximation; advisory only.
    Normal,
}

/// A correlator estimate from coincidence counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelatorEstimate {
    pub schema: String,
    pub mean: f64,
    pub n_complete: u64,
    pub n_total: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub method: CiMethod,
}

/// Mean outcome product over complete triples with a two-sided Hoeffding
/// interval eps = sqrt(ln(2/delta) / (2 n)) at confidence 1 - delta.
pub fn estimate_correlator(records: &[ClickRecord], delta: f64) -> Result<CorrelatorEstimate> {
    estimate_correlator_with(records, delta, CiMethod::Hoeffding)
}

pub fn estimate_correlator_with(
    records: &[ClickRecord],
    delta: f64,
    method: CiMethod,
) -> Result<CorrelatorEstimate> {
    if !(0.0 < delta && delta < 1.0) {
        return Err(Error::Domain(format!("delta {delta} outside (0, 1)")));
    }
    let n_total = records.len() as u64;
    let products: Vec<f64> = records.iter().filter_map(|r| r.product()).collect();
    let n_complete = products.len() as u64;
    if n_complete == 0 {
        return Err(Error::InsufficientData(
            "no complete coincidence triples in the record stream".into(),
        ));
    }
    let mean = products.iter().sum::<f64>() / n_complete as f64;
    let eps = match method {
        CiMethod::Hoeffding => hoeffding_epsilon(n_complete, delta),
        CiMethod::Normal => {
            // Outcome products are +-1, so the variance is 1 - mean^2.
            let sigma = (1.0 - mean * mean).max(0.0).sqrt();
            normal_quantile(1.0 - delta / 2.0) * sigma / (n_complete as f64).sqrt()
        }
    };
    Ok(CorrelatorEstimate {
        schema: ESTIMATE_SCHEMA.to_string(),
        mean,
        n_complete,
        n_total,
        ci_low: (mean - eps).max(-1.0),
        ci_high: (mean + eps).min(1.0),
        confidence: 1.0 - delta,
        method,
    })
}

/// Two-sided Hoeffding half-width for a mean of [-1, 1] variables.
pub fn hoeffding_epsilon(n_complete: u64, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * n_complete as f64)).sqrt()
}

/// Shrink a noisy estimate toward zero by its interval half-width; feeding
/// shrunk triplets to the direct bound keeps the correlator state physical
/// under statistical noise and is conservative by construction.
pub fn shrink_toward_zero(value: f64, eps: f64) -> f64 {
    if value > 0.0 {
        (value - eps).max(0.0)
    } else {
        (value + eps).min(0.0)
    }
}

/// A bound report together with the statistical guarantee it inherits.
#[derive(Debug, Clone, Serialize)]
pub struct CertifiedBound {
    pub method: CiMethod,
    pub confidence: f64,
    #[serde(flatten)]
    pub report: BoundReport,
}

/// Evaluate every floor at the conservative end of the interval
/// (z = ci_low) for each requested span.
pub fn certified_report(est: &CorrelatorEstimate, spans: &[Span]) -> Vec<CertifiedBound> {
    spans
        .iter()
        .map(|&span| CertifiedBound {
            method: est.method,
            confidence: est.confidence,
            report: BoundReport::from_z_span(est.ci_low, span),
        })
        .collect()
}

/// Sample-size plan for a target half-width and confidence at a given
/// threefold collection/detection efficiency.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SamplePlan {
    pub complete_triples: u64,
    pub windows: u64,
}

/// complete = ceil(ln(2/delta) / (2 eps^2)); windows = ceil(complete / eta^3).
pub fn plan_samples(eta: f64, epsilon: f64, delta: f64) -> Result<SamplePlan> {
    for (name, v) in [("eta", eta), ("epsilon", epsilon), ("delta", delta)] {
        if !(0.0 < v && v < 1.0 || name == "eta" && v == 1.0) {
            return Err(Error::Domain(format!("{name} = {v} outside (0, 1)")));
        }
    }
    let complete = ((2.0 / delta).ln() / (2.0 * epsilon * epsilon)).ceil();
    let windows = (complete / eta.powi(3)).ceil();
    Ok(SamplePlan {
        complete_triples: complete as u64,
        windows: windows as u64,
    })
}

/// Inverse standard normal CDF (Acklam's rational approximation, ~1e-9
/// relative accuracy); used only for the advisory normal interval.
fn normal_quantile(p: f64) -> f64 {
    debug_assert!(0.0 < p && p < 1.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let p_low = 0.02425;
    if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}

// --- persisted record formats ---------------------------------------------

/// Line-delimited JSON, one record per line.
pub fn records_to_ldjson(records: &[ClickRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("click records always serialize"))
        .fold(String::new(), |mut acc, line| {
            acc.push_str(&line);
            acc.push('\n');
            acc
        })
}

pub fn records_from_ldjson(text: &str) -> Result<Vec<ClickRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let r: ClickRecord =
                serde_json::from_str(l).map_err(|e| Error::Parse(e.to_string()))?;
            if r.schema != CLICK_SCHEMA {
                return Err(Error::Parse(format!(
                    "unknown record schema '{}'",
                    r.schema
                )));
            }
            if r.settings.len() != r.outcomes.len() {
                return Err(Error::Parse("settings and outcomes lengths differ".into()));
            }
            Ok(r)
        })
        .collect()
}

/// Compact CSV: schema,trial,window,settings,outcomes with 'L' for lost.
pub fn records_to_csv(records: &[ClickRecord]) -> String {
    let mut out = String::from("schema,trial,window,settings,outcomes\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.schema,
            r.trial_id,
            r.window_start,
            r.settings,
            r.outcome_string()
        ));
    }
    out
}

pub fn records_from_csv(text: &str) -> Result<Vec<ClickRecord>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty CSV".into()))?;
    if header != "schema,trial,window,settings,outcomes" {
        return Err(Error::Parse(format!("unexpected CSV header '{header}'")));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::Parse(format!(
                    "expected 5 fields, got {}",
                    fields.len()
                )));
            }
            if fields[0] != CLICK_SCHEMA {
                return Err(Error::Parse(format!(
                    "unknown record schema '{}'",
                    fields[0]
                )));
            }
            let outcomes = fields[4]
                .chars()
                .map(Outcome::from_char)
                .collect::<Result<Vec<_>>>()?;
            if outcomes.len() != fields[3].len() {
                return Err(Error::Parse("settings and outcomes lengths differ".into()));
            }
            Ok(ClickRecord {
                schema: fields[0].to_string(),
                trial_id: fields[1]
                    .parse()
                    .map_err(|_| Error::Parse("bad trial id".into()))?,
                window_start: fields[2]
                    .parse()
                    .map_err(|_| Error::Parse("bad window".into()))?,
                settings: fields[3].to_string(),
                outcomes,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densesim::{cluster_state, wc_state};

    #[test]
    fn perfect_cluster_gives_unit_products() {
        let rho = Ensemble::pure(cluster_state(4).unwrap());
        let plan = ExperimentPlan::full_cycle(4, 1.0, 500, 7).unwrap();
        let records = simulate_clicks(&ClickSource::State(&rho), &plan).unwrap();
        assert_eq!(records.len(), 500);
        for r in &records {
            assert!(r.is_complete());
            assert_eq!(r.product(), Some(1.0));
        }
        let est = estimate_correlator(&records, 0.01).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.ci_high, 1.0);
    }

    #[test]
    fn loss_rate_matches_eta_cubed() {
        let rho = Ensemble::pure(cluster_state(3).unwrap());
        let plan = ExperimentPlan::full_cycle(3, 0.5, 20_000, 3).unwrap();
        let records = simulate_clicks(&ClickSource::State(&rho), &plan).unwrap();
        let complete = records.iter().filter(|r| r.is_complete()).count() as f64;
        let fraction = complete / records.len() as f64;
        // Binomial(20000, 0.125): three sigma is about 0.007.
        assert!(
            (fraction - 0.125).abs() < 0.01,
            "complete fraction {fraction}"
        );
    }

    #[test]
    fn source_estimates_match_the_analytic_correlator() {
        let params = SourceParams::new(8, 0.05).unwrap();
        let plan = ExperimentPlan::full_cycle(9, 1.0, 100_000, 11).unwrap();
        let records = simulate_clicks(&ClickSource::Source(&params), &plan).unwrap();
        let est = estimate_correlator(&records, 0.01).unwrap();
        let truth = crate::errormodel::interior_z(0.05).unwrap();
        assert!(est.ci_low <= truth && truth <= est.ci_high);
        assert!((est.mean - truth).abs() < hoeffding_epsilon(est.n_complete, 0.01));
    }

    #[test]
    fn state_and_source_windows_agree_for_wc_chain() {
        // A wc_state window distribution has the same all-or-nothing
        // structure the source path assumes.
        let rho = wc_state(5, 0.9).unwrap();
        let d = window_distribution(&ClickSource::State(&rho), 1).unwrap();
        let z = crate::bounds::wc_z(0.9, 5);
        for (idx, p) in d.iter().enumerate() {
            let parity = (idx.count_ones() % 2) as f64;
            let expected = (1.0 + (1.0 - 2.0 * parity) * z) / 8.0;
            assert!((p - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn estimator_is_consistent() {
        // The error stays inside the shrinking Hoeffding envelope as the
        // sample grows (seeded, so this is deterministic).
        let params = SourceParams::new(6, 0.1).unwrap();
        let truth = crate::errormodel::interior_z(0.1).unwrap();
        let mut final_err = f64::INFINITY;
        for windows in [1_000u64, 10_000, 100_000] {
            let plan = ExperimentPlan::full_cycle(7, 1.0, windows, 13).unwrap();
            let records = simulate_clicks(&ClickSource::Source(&params), &plan).unwrap();
            let est = estimate_correlator(&records, 0.01).unwrap();
            final_err = (est.mean - truth).abs();
            assert!(
                final_err <= hoeffding_epsilon(est.n_complete, 0.01),
                "windows={windows}: error {final_err} outside envelope"
            );
        }
        assert!(final_err < 0.01);
    }

    #[test]
    fn loss_does_not_bias_the_estimate() {
        let params = SourceParams::new(6, 0.08).unwrap();
        let plan_full = ExperimentPlan::full_cycle(7, 1.0, 60_000, 29).unwrap();
        let plan_lossy = ExperimentPlan::full_cycle(7, 0.3, 60_000, 31).unwrap();
        let est_full = estimate_correlator(
            &simulate_clicks(&ClickSource::Source(&params), &plan_full).unwrap(),
            0.01,
        )
        .unwrap();
        let est_lossy = estimate_correlator(
            &simulate_clicks(&ClickSource::Source(&params), &plan_lossy).unwrap(),
            0.01,
        )
        .unwrap();
        let combined =
            (est_full.ci_high - est_full.ci_low + est_lossy.ci_high - est_lossy.ci_low) / 2.0;
        assert!((est_full.mean - est_lossy.mean).abs() < combined);
    }

    #[test]
    fn determinism_is_byte_exact() {
        let params = SourceParams::new(5, 0.03).unwrap();
        let plan = ExperimentPlan::full_cycle(6, 0.4, 5_000, 42).unwrap();
        let a = simulate_clicks(&ClickSource::Source(&params), &plan).unwrap();
        let b = simulate_clicks(&ClickSource::Source(&params), &plan).unwrap();
        assert_eq!(records_to_csv(&a), records_to_csv(&b));
        let ea = estimate_correlator(&a, 0.01).unwrap();
        let eb = estimate_correlator(&b, 0.01).unwrap();
        assert_eq!(ea.mean.to_bits(), eb.mean.to_bits());
        assert_eq!(ea.ci_low.to_bits(), eb.ci_low.to_bits());
    }

    #[test]
    fn insufficient_data_is_an_error() {
        let records = vec![ClickRecord {
            schema: CLICK_SCHEMA.into(),
            trial_id: 0,
            window_start: 0,
            settings: "ZXZ".into(),
            outcomes: vec![Outcome::Plus, Outcome::Lost, Outcome::Minus],
        }];
        assert!(matches!(
            estimate_correlator(&records, 0.01),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn hoeffding_width_examples() {
        // eps = 0.01 at delta = 0.01 needs 26492 complete triples.
        let eps = hoeffding_epsilon(26_492, 0.01);
        assert!(eps <= 0.01 && eps > 0.00999);
        let plan = plan_samples(0.01, 0.01, 0.01).unwrap();
        assert_eq!(plan.complete_triples, 26_492);
        assert_eq!(plan.windows, 26_492_000_000);
        let plan = plan_samples(1.0, 0.01, 0.01).unwrap();
        assert_eq!(plan.windows, plan.complete_triples);
        assert!(plan_samples(0.0, 0.01, 0.01).is_err());
    }

    #[test]
    fn normal_quantile_known_values() {
        assert!((normal_quantile(0.95) - 1.6448536269514722).abs() < 1e-7);
        assert!((normal_quantile(0.975) - 1.959963984540054).abs() < 1e-7);
        assert!((normal_quantile(0.995) - 2.5758293035489004).abs() < 1e-7);
        assert!((normal_quantile(0.5)).abs() < 1e-12);
        assert!((normal_quantile(0.005) + normal_quantile(0.995)).abs() < 1e-9);
    }

    #[test]
    fn normal_interval_is_narrower_on_concentrated_data() {
        let params = SourceParams::new(6, 0.02).unwrap();
        let plan = ExperimentPlan::full_cycle(7, 1.0, 20_000, 17).unwrap();
        let records = simulate_clicks(&ClickSource::Source(&params), &plan).unwrap();
        let h = estimate_correlator_with(&records, 0.01, CiMethod::Hoeffding).unwrap();
        let n = estimate_correlator_with(&records, 0.01, CiMethod::Normal).unwrap();
        assert!(n.ci_high - n.ci_low < h.ci_high - h.ci_low);
        assert_eq!(h.mean, n.mean);
    }

    #[test]
    fn certified_reports_are_monotone_in_ci_low() {
        let base = CorrelatorEstimate {
            schema: ESTIMATE_SCHEMA.into(),
            mean: 0.95,
            n_complete: 1000,
            n_total: 1000,
            ci_low: 0.93,
            ci_high: 0.97,
            confidence: 0.99,
            method: CiMethod::Hoeffding,
        };
        let spans = [
            Span::MeasuredQubits(1),
            Span::MeasuredQubits(5),
            Span::Segment(3),
        ];
        let high = certified_report(&base, &spans);
        let mut lower = base.clone();
        lower.ci_low = 0.90;
        let low = certified_report(&lower, &spans);
        for (h, l) in high.iter().zip(&low) {
            assert!(l.report.le_floor <= h.report.le_floor);
            assert!(l.report.fidelity_floor <= h.report.fidelity_floor);
            assert!(l.report.fef_floor <= h.report.fef_floor);
            assert!(l.report.teleport_floor <= h.report.teleport_floor);
        }
    }

    #[test]
    fn certified_report_threshold_examples() {
        let est = CorrelatorEstimate {
            schema: ESTIMATE_SCHEMA.into(),
            mean: 6.0 / 7.0,
            n_complete: 1,
            n_total: 1,
            ci_low: 6.0 / 7.0,
            ci_high: 6.0 / 7.0,
            confidence: 0.99,
            method: CiMethod::Hoeffding,
        };
        let reports = certified_report(&est, &[Span::MeasuredQubits(5)]);
        assert!(reports[0].report.le_floor.abs() < 1e-12);

        let mut est = est;
        est.ci_low = 0.9;
        let reports = certified_report(&est, &[Span::Segment(3)]);
        assert!((reports[0].report.teleport_floor - 0.9).abs() < 1e-12);
        // ci_low = 1 puts every floor at 1.
        est.ci_low = 1.0;
        let reports = certified_report(&est, &[Span::Segment(4)]);
        assert!((reports[0].report.le_floor - 1.0).abs() < 1e-15);
        assert!((reports[0].report.fidelity_floor - 1.0).abs() < 1e-15);
        assert!((reports[0].report.teleport_floor - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shrink_moves_toward_zero() {
        assert!((shrink_toward_zero(0.9, 0.05) - 0.85).abs() < 1e-15);
        assert!((shrink_toward_zero(-0.9, 0.05) + 0.85).abs() < 1e-15);
        assert_eq!(shrink_toward_zero(0.02, 0.05), 0.0);
    }

    #[test]
    fn record_formats_round_trip() {
        let params = SourceParams::new(5, 0.04).unwrap();
        let plan = ExperimentPlan::full_cycle(6, 0.6, 200, 2).unwrap();
        let records = simulate_clicks(&ClickSource::Source(&params), &plan).unwrap();
        let back = records_from_ldjson(&records_to_ldjson(&records)).unwrap();
        assert_eq!(records, back);
        let back = records_from_csv(&records_to_csv(&records)).unwrap();
        assert_eq!(records, back);
        assert!(records_from_csv("bogus\n").is_err());
        // Length mismatch between settings and outcomes is rejected.
        let bad = r#"{"schema":"click/1","trial_id":0,"window_start":0,"settings":"ZXZ","outcomes":["Plus"]}"#;
        assert!(records_from_ldjson(bad).is_err());
    }
}
