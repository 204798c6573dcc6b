//! End-to-end obstruction audit: operator-identity premises, the joint
//! distribution of the commuting momentum pair, the ε threshold at confidence
//! 1−δ, and the exact interval arithmetic of the contradiction certificate.
//!
//! Hidden values are never simulated; the audit verifies the operator-level
//! and probabilistic premises and executes the final contradiction as exact
//! arithmetic on (ε, z).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::disturb::{cluster_reals, disturbance, Histogram};
use crate::error::{Error, Result};
use crate::kscons::{make_family, ObstructionFamily, EXACT_IDENTITY_TOL};
use crate::lattice::{l2_norm, Direction, Ensemble, PureState, StateSpec, C64};
use crate::opalg::{applied_norm, commutator, sym_product, LinOp};
use crate::report::{fmt_f64, json_escape};

/// Joint outcome distribution over (v₁, v₂) = (cos(b₁p), cos(b₂ₙp)).
#[derive(Debug, Clone)]
pub struct JointHistogram {
    /// (v1 representative, v2 representative, probability), sorted by value.
    pub buckets: Vec<(f64, f64, f64)>,
}

impl JointHistogram {
    pub fn total(&self) -> f64 {
        self.buckets.iter().map(|(_, _, p)| p).sum()
    }

    pub fn marginal_v1(&self) -> Histogram {
        marginal(&self.buckets, |b| b.0)
    }

    pub fn marginal_v2(&self) -> Histogram {
        marginal(&self.buckets, |b| b.1)
    }

    pub fn probability_near(&self, v1: f64, v2: f64, tol: f64) -> f64 {
        self.buckets
            .iter()
            .filter(|(a, b, _)| (a - v1).abs() <= tol && (b - v2).abs() <= tol)
            .map(|(_, _, p)| p)
            .sum()
    }

    /// Atoms of |v₁·v₂| with their probabilities.
    pub fn magnitude_atoms(&self) -> Vec<(f64, f64)> {
        self.buckets
            .iter()
            .map(|(a, b, p)| ((a * b).abs(), *p))
            .collect()
    }

    /// P(|v₁·v₂| > threshold).
    pub fn probability_magnitude_above(&self, threshold: f64) -> f64 {
        self.magnitude_atoms()
            .iter()
            .filter(|(m, _)| *m > threshold)
            .map(|(_, p)| p)
            .sum()
    }
}

fn marginal(buckets: &[(f64, f64, f64)], key: impl Fn(&(f64, f64, f64)) -> f64) -> Histogram {
    let mut acc: Vec<(f64, f64)> = Vec::new();
    for b in buckets {
        let v = key(b);
        match acc.iter_mut().find(|(x, _)| *x == v) {
            Some((_, p)) => *p += b.2,
            None => acc.push((v, b.2)),
        }
    }
    acc.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Histogram { buckets: acc }
}

/// Joint distribution of the two commuting momentum observables, computed
/// from momentum-representation amplitudes. Marginals agree with the
/// single-observable distributions by construction (same clustering).
pub fn joint_b_distribution(
    rho: &Ensemble,
    family: &ObstructionFamily,
    bucket_tol: f64,
) -> Result<JointHistogram> {
    if !(bucket_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bucket tolerance must be positive, got {bucket_tol}"
        )));
    }
    if !rho.config().same_grid(family.config()) {
        return Err(Error::DimensionMismatch {
            expected: family.config().n(),
            got: rho.config().n(),
        });
    }
    let cfg = family.config();
    let n = cfg.n();
    let mut probs = vec![0.0f64; n];
    for (w, psi) in rho.members() {
        let mom = crate::lattice::transform(psi, Direction::ToMomentum)?;
        for (p, a) in probs.iter_mut().zip(mom.amplitudes()) {
            *p += w * a.norm_sqr();
        }
    }
    let b1 = family.b1();
    let b2n = family.b2n();
    let v1: Vec<f64> = cfg.p_samples().iter().map(|&p| (b1 * p).cos()).collect();
    let v2: Vec<f64> = cfg.p_samples().iter().map(|&p| (b2n * p).cos()).collect();
    let (reps1, idx1) = cluster_reals(&v1, bucket_tol);
    let (reps2, idx2) = cluster_reals(&v2, bucket_tol);
    let mut joint: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for k in 0..n {
        *joint.entry((idx1[k], idx2[k])).or_insert(0.0) += probs[k];
    }
    let buckets = joint
        .into_iter()
        .map(|((i, j), p)| (reps1[i], reps2[j], p))
        .collect();
    Ok(JointHistogram { buckets })
}

/// Largest ε with P(|v₁·v₂| > 3ε) ≥ 1−δ, computed on the closed event and
/// then pulled below the boundary by one ulp so the strict inequality holds
/// at the returned value. Returns 0 when no positive ε qualifies.
pub fn epsilon_threshold(joint: &JointHistogram, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let mut atoms = joint.magnitude_atoms();
    atoms.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let target = 1.0 - delta - 1e-12;
    let mut cum = 0.0;
    let mut i = 0;
    while i < atoms.len() {
        let m = atoms[i].0;
        // absorb all atoms at this magnitude before testing the closed event
        while i < atoms.len() && atoms[i].0 == m {
            cum += atoms[i].1;
            i += 1;
        }
        if cum >= target {
            if m <= 0.0 {
                return Ok(0.0);
            }
            return Ok((m / 3.0).next_down());
        }
    }
    Ok(0.0)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "delta must satisfy 0 < delta < 1/2, got {delta}"
        )));
    }
    Ok(())
}

/// Exact interval arithmetic for the final step: if |x−z| < ε, |y−z| < ε
/// then |x−y| < 2ε (upper gap); if x = −y and |z| ≥ z_lower_bound then
/// |x−y| > 2(z_lower_bound − ε) (lower gap). Contradiction when the forced
/// lower gap reaches the upper gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContradictionCertificate {
    pub epsilon: f64,
    pub z_lower_bound: f64,
    pub upper_gap: f64,
    pub lower_gap: f64,
    pub contradiction: bool,
}

impl ContradictionCertificate {
    pub fn to_json(&self) -> String {
        format!(
            "{{\"epsilon\": {}, \"z_lower_bound\": {}, \"upper_gap\": {}, \"lower_gap\": {}, \"contradiction\": {}}}",
            fmt_f64(self.epsilon),
            fmt_f64(self.z_lower_bound),
            fmt_f64(self.upper_gap),
            fmt_f64(self.lower_gap),
            self.contradiction
        )
    }
}

/// Build the certificate from ε > 0 and a lower bound on |z|.
pub fn contradiction_certificate(
    epsilon: f64,
    z_lower_bound: f64,
) -> Result<ContradictionCertificate> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(z_lower_bound >= 0.0) || !z_lower_bound.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "z lower bound must be nonnegative, got {z_lower_bound}"
        )));
    }
    let upper_gap = 2.0 * epsilon;
    let lower_gap = 2.0 * (z_lower_bound - epsilon);
    Ok(ContradictionCertificate {
        epsilon,
        z_lower_bound,
        upper_gap,
        lower_gap,
        contradiction: lower_gap >= upper_gap,
    })
}

/// Residual of (B̂₁B̂₂ₙ)∘(Â₁ₙÂ₂ₙ) + (B̂₁∘Â₂ₙ)·B̂₂ₙ·Â₁ₙ, which the
/// commutation/anticommutation table forces to vanish.
pub fn identity_cc_check(family: &ObstructionFamily, states: &[PureState]) -> Result<f64> {
    if states.is_empty() {
        return Err(Error::InvalidParameter(
            "identity check requires at least one state".into(),
        ));
    }
    let lhs = sym_product(&family.b1_b2n_op(), &family.a1_a2_op())?;
    let rhs = LinOp::product(vec![
        sym_product(family.b1_op(), family.a2_op())?,
        family.b2n_op().clone(),
        family.a1_op().clone(),
    ])?;
    let one = C64::new(1.0, 0.0);
    let sum = LinOp::weighted_sum(vec![(one, lhs), (one, rhs)])?;
    applied_norm(&sum, states)
}

/// Max applied-norm residuals of every operator-level premise the audit
/// relies on: the commuting pairs behind the plain Product Rule steps, the
/// three symmetrized-product commutations, identity (cc), and the disturbance
/// norms for every moment order up to k_max (reported, not thresholded —
/// their smallness is asymptotic in n).
pub fn premise_residuals(
    family: &ObstructionFamily,
    states: &[PureState],
    k_max: u32,
) -> Result<BTreeMap<String, f64>> {
    if k_max < 1 {
        return Err(Error::InvalidParameter("k_max must be >= 1".into()));
    }
    let mut map = BTreeMap::new();
    let a1 = family.a1_op();
    let a2 = family.a2_op();
    let b1 = family.b1_op();
    let b2n = family.b2n_op();
    let a1a2 = family.a1_a2_op();
    let b1b2n = family.b1_b2n_op();

    let (comm, _) = crate::opalg::residual_suite(a1, a2, states)?;
    map.insert("comm_a1n_a2n".into(), comm);
    let (comm, _) = crate::opalg::residual_suite(a1, b2n, states)?;
    map.insert("comm_a1n_b2n".into(), comm);
    let (comm, _) = crate::opalg::residual_suite(b1, b2n, states)?;
    map.insert("comm_b1_b2n".into(), comm);

    let sym_b1_a2 = sym_product(b1, a2)?;
    map.insert(
        "comm_a2n_symprod_b1_a2n".into(),
        applied_norm(&commutator(a2, &sym_b1_a2)?, states)?,
    );
    map.insert(
        "comm_a1na2n_symprod_b1b2n_a1na2n".into(),
        applied_norm(
            &commutator(&a1a2, &sym_product(&b1b2n, &a1a2)?)?,
            states,
        )?,
    );
    let b2n_a1 = LinOp::product(vec![b2n.clone(), a1.clone()])?;
    map.insert(
        "comm_symprod_b1_a2n_b2na1n".into(),
        applied_norm(&commutator(&sym_b1_a2, &b2n_a1)?, states)?,
    );
    map.insert("identity_cc".into(), identity_cc_check(family, states)?);

    let e2 = family.e2().as_slice().to_vec();
    let (p_plus, p_minus) = crate::disturb::involution_projections(&a1a2)?;
    let prod_projections = vec![p_plus, p_minus];
    for k in 1..=k_max {
        let delta_b1 = disturbance(&b1.pow(k), &e2)?;
        let delta_prod = disturbance(&b1b2n.pow(k), &prod_projections)?;
        let mut worst_b1: f64 = 0.0;
        let mut worst_prod: f64 = 0.0;
        for s in states {
            worst_b1 = worst_b1.max(l2_norm(&delta_b1.apply_state(s)?));
            worst_prod = worst_prod.max(l2_norm(&delta_prod.apply_state(s)?));
        }
        map.insert(format!("delta_b1_k{k}"), worst_b1);
        map.insert(format!("delta_b1b2n_k{k}"), worst_prod);
    }
    Ok(map)
}

/// Premises judged against `exact_tol`; disturbance norms are reported only.
fn is_exact_premise(name: &str) -> bool {
    !name.starts_with("delta_")
}

/// Audit parameters. Defaults: n = 4, c = 1, a = 1, N = 2048, δ = 0.05,
/// k_max = 4, η = 1e-6, the standard five-state Gaussian family.
#[derive(Debug, Clone)]
pub struct AuditParams {
    pub grid: usize,
    pub n: u32,
    pub c: u32,
    pub a: f64,
    pub delta: f64,
    pub k_max: u32,
    pub eta: f64,
    pub bucket_tol: f64,
    pub exact_tol: f64,
    pub states: Vec<StateSpec>,
}

impl Default for AuditParams {
    fn default() -> Self {
        AuditParams {
            grid: 2048,
            n: 4,
            c: 1,
            a: 1.0,
            delta: 0.05,
            k_max: 4,
            eta: 1e-6,
            bucket_tol: 1e-9,
            exact_tol: EXACT_IDENTITY_TOL,
            states: StateSpec::standard_family(),
        }
    }
}

/// Full audit result; serializes to JSON with stable snake_case field names
/// and to a two-column CSV summary.
#[derive(Debug, Clone)]
pub struct AuditReport {
    pub n: u32,
    pub delta: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub p_threshold: f64,
    pub p_zero_band: f64,
    pub premise_residuals: BTreeMap<String, f64>,
    pub premise_verdicts: BTreeMap<String, bool>,
    pub certificate: Option<ContradictionCertificate>,
    pub verdict: String,
}

impl AuditReport {
    pub fn pass(&self) -> bool {
        self.verdict == "pass"
    }

    /// Names and residuals of premises that failed their tolerance.
    pub fn failures(&self) -> Vec<(String, f64)> {
        self.premise_verdicts
            .iter()
            .filter(|(_, ok)| !**ok)
            .map(|(name, _)| (name.clone(), self.premise_residuals[name]))
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n");
        let _ = writeln!(out, "  \"n\": {},", self.n);
        let _ = writeln!(out, "  \"delta\": {},", fmt_f64(self.delta));
        let _ = writeln!(out, "  \"epsilon\": {},", fmt_f64(self.epsilon));
        let _ = writeln!(out, "  \"eta\": {},", fmt_f64(self.eta));
        let _ = writeln!(out, "  \"p_threshold\": {},", fmt_f64(self.p_threshold));
        let _ = writeln!(out, "  \"p_zero_band\": {},", fmt_f64(self.p_zero_band));
        out.push_str("  \"premise_residuals\": {\n");
        let last = self.premise_residuals.len();
        for (i, (k, v)) in self.premise_residuals.iter().enumerate() {
            let _ = write!(out, "    \"{}\": {}", json_escape(k), fmt_f64(*v));
            out.push_str(if i + 1 < last { ",\n" } else { "\n" });
        }
        out.push_str("  },\n  \"premise_verdicts\": {\n");
        let last = self.premise_verdicts.len();
        for (i, (k, v)) in self.premise_verdicts.iter().enumerate() {
            let _ = write!(out, "    \"{}\": {}", json_escape(k), v);
            out.push_str(if i + 1 < last { ",\n" } else { "\n" });
        }
        out.push_str("  },\n");
        match &self.certificate {
            Some(c) => {
                let _ = writeln!(out, "  \"certificate\": {},", c.to_json());
            }
            None => out.push_str("  \"certificate\": null,\n"),
        }
        let _ = writeln!(out, "  \"verdict\": \"{}\"", json_escape(&self.verdict));
        out.push_str("}\n");
        out
    }

    pub fn to_csv_summary(&self) -> String {
        let mut out = String::from("field,value\n");
        let _ = writeln!(out, "n,{}", self.n);
        let _ = writeln!(out, "delta,{}", fmt_f64(self.delta));
        let _ = writeln!(out, "epsilon,{}", fmt_f64(self.epsilon));
        let _ = writeln!(out, "eta,{}", fmt_f64(self.eta));
        let _ = writeln!(out, "p_threshold,{}", fmt_f64(self.p_threshold));
        let _ = writeln!(out, "p_zero_band,{}", fmt_f64(self.p_zero_band));
        let _ = writeln!(out, "verdict,{}", self.verdict);
        for (k, v) in &self.premise_residuals {
            let _ = writeln!(out, "residual_{k},{}", fmt_f64(*v));
        }
        for (k, v) in &self.premise_verdicts {
            let _ = writeln!(out, "pass_{k},{}", if *v { 1 } else { 0 });
        }
        out
    }
}

/// Run the whole audit: build the family, check every premise, compute the
/// joint distribution and ε(δ), and attach the contradiction certificate with
/// the 3ε margin. Any premise failure is reported with its residual in the
/// verdict maps, never silently passed.
pub fn run_audit(params: &AuditParams) -> Result<AuditReport> {
    check_delta(params.delta)?;
    if !(params.eta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eta must be nonnegative, got {}",
            params.eta
        )));
    }
    let family = make_family(params.grid, params.n, params.c, params.a)?;
    let states = family.instantiate_states(&params.states)?;
    let rho = Ensemble::uniform(states.clone())?;

    let premises = premise_residuals(&family, &states, params.k_max)?;
    let mut verdicts = BTreeMap::new();
    for (name, residual) in &premises {
        if is_exact_premise(name) {
            verdicts.insert(name.clone(), *residual < params.exact_tol);
        }
    }

    let joint = joint_b_distribution(&rho, &family, params.bucket_tol)?;
    let epsilon = epsilon_threshold(&joint, params.delta)?;
    let p_threshold = joint
        .probability_magnitude_above(3.0 * epsilon)
        .clamp(0.0, 1.0);
    let p_zero_band = joint
        .marginal_v1()
        .probability_within_band(params.eta)
        .clamp(0.0, 1.0);

    let certificate = if epsilon > 0.0 {
        Some(contradiction_certificate(epsilon, 3.0 * epsilon)?)
    } else {
        None
    };

    let all_premises_pass = verdicts.values().all(|v| *v);
    let verdict = if all_premises_pass && epsilon > 0.0 {
        "pass"
    } else {
        "fail"
    };

    Ok(AuditReport {
        n: family.n(),
        delta: params.delta,
        epsilon,
        eta: params.eta,
        p_threshold,
        p_zero_band,
        premise_residuals: premises,
        premise_verdicts: verdicts,
        certificate,
        verdict: verdict.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disturb::outcome_distribution;

    fn standard_states(family: &ObstructionFamily) -> Vec<PureState> {
        family
            .instantiate_states(&StateSpec::standard_family())
            .unwrap()
    }

    #[test]
    fn identity_cc_small_and_negative_control_large() {
        let fam = make_family(1024, 1, 1, 1.0).unwrap();
        let states = standard_states(&fam);
        let residual = identity_cc_check(&fam, &states).unwrap();
        assert!(residual < 1e-10, "cc residual {residual}");

        // replacing Â₂ₙ with the identity must break the identity
        let lhs = sym_product(&fam.b1_b2n_op(), fam.a1_op()).unwrap();
        let rhs = LinOp::product(vec![
            sym_product(fam.b1_op(), &LinOp::identity(fam.config())).unwrap(),
            fam.b2n_op().clone(),
            fam.a1_op().clone(),
        ])
        .unwrap();
        let one = C64::new(1.0, 0.0);
        let sum = LinOp::weighted_sum(vec![(one, lhs), (one, rhs)]).unwrap();
        let broken = applied_norm(&sum, &states).unwrap();
        assert!(broken > 0.1, "negative control too small: {broken}");
    }

    #[test]
    fn identity_cc_dense_oracle_at_n256() {
        let fam = make_family(256, 1, 1, 1.0).unwrap();
        let lhs = sym_product(&fam.b1_b2n_op(), &fam.a1_a2_op()).unwrap();
        let rhs = LinOp::product(vec![
            sym_product(fam.b1_op(), fam.a2_op()).unwrap(),
            fam.b2n_op().clone(),
            fam.a1_op().clone(),
        ])
        .unwrap();
        let dl = crate::opalg::dense_materialize(&lhs).unwrap();
        let dr = crate::opalg::dense_materialize(&rhs).unwrap();
        // lhs = -rhs entry-wise
        let mut worst: f64 = 0.0;
        for i in 0..256 {
            for j in 0..256 {
                worst = worst.max((dl.get(i, j) + dr.get(i, j)).norm());
            }
        }
        assert!(worst < 1e-10, "dense cc defect {worst}");
    }

    #[test]
    fn joint_distribution_sums_to_one_and_marginals_agree() {
        let fam = make_family(1024, 2, 1, 1.0).unwrap();
        let rho = Ensemble::uniform(standard_states(&fam)).unwrap();
        let joint = joint_b_distribution(&rho, &fam, 1e-9).unwrap();
        assert!((joint.total() - 1.0).abs() < 1e-10);

        let m1 = joint.marginal_v1();
        let h1 = outcome_distribution(&rho, fam.b1_op(), 1e-9).unwrap();
        assert_eq!(m1.buckets.len(), h1.buckets.len());
        for ((v_a, p_a), (v_b, p_b)) in m1.buckets.iter().zip(&h1.buckets) {
            assert!((v_a - v_b).abs() < 1e-12);
            assert!((p_a - p_b).abs() < 1e-10);
        }
        let m2 = joint.marginal_v2();
        let h2 = outcome_distribution(&rho, fam.b2n_op(), 1e-9).unwrap();
        for ((v_a, p_a), (v_b, p_b)) in m2.buckets.iter().zip(&h2.buckets) {
            assert!((v_a - v_b).abs() < 1e-12);
            assert!((p_a - p_b).abs() < 1e-10);
        }
    }

    #[test]
    fn joint_mass_concentrates_for_slow_cosines() {
        // c = 8 slows cos(b₂ₙp) so neighbor momenta merge at coarse tolerance
        let fam = make_family(512, 8, 8, 1.0).unwrap();
        let psi = fam
            .instantiate_states(&[StateSpec::gaussian(0.0, 0.0, 1.0 / 6.0)])
            .unwrap();
        let rho = Ensemble::uniform(psi).unwrap();
        let joint = joint_b_distribution(&rho, &fam, 0.1).unwrap();
        let p = joint.probability_near(1.0, 1.0, 0.2);
        assert!(p >= 0.9, "joint mass near (1, 1) was {p}");
    }

    #[test]
    fn epsilon_threshold_point_mass() {
        let joint = JointHistogram {
            buckets: vec![(0.9, 1.0, 1.0)],
        };
        let eps = epsilon_threshold(&joint, 0.3).unwrap();
        assert!((eps - 0.3).abs() < 1e-12);
        assert!(eps < 0.3, "open inequality handled by one-ulp decrement");
    }

    #[test]
    fn epsilon_threshold_two_atoms() {
        // P(|v| > 0.3) = 0.95 at delta = 0.1 allows eps >= 0.1
        let joint = JointHistogram {
            buckets: vec![(0.9, 1.0, 0.95), (0.1, 1.0, 0.05)],
        };
        let eps = epsilon_threshold(&joint, 0.1).unwrap();
        assert!(eps >= 0.1);
        assert!((eps - 0.3).abs() < 1e-12);
    }

    #[test]
    fn epsilon_threshold_monotone_in_delta() {
        // a smaller failure budget can only shrink the threshold:
        // delta' < delta implies eps(delta') <= eps(delta)
        let fam = make_family(1024, 4, 1, 1.0).unwrap();
        let rho = Ensemble::uniform(standard_states(&fam)).unwrap();
        let joint = joint_b_distribution(&rho, &fam, 1e-9).unwrap();
        let mut last = 0.0;
        for delta in [0.01, 0.05, 0.1, 0.2, 0.4] {
            let eps = epsilon_threshold(&joint, delta).unwrap();
            assert!(eps + 1e-15 >= last, "eps not monotone at delta={delta}");
            last = eps;
        }
        assert!(epsilon_threshold(&joint, 0.0).is_err());
        assert!(epsilon_threshold(&joint, 0.6).is_err());
    }

    #[test]
    fn epsilon_threshold_against_sorted_scan_oracle() {
        let fam = make_family(1024, 4, 1, 1.0).unwrap();
        let psi = fam
            .instantiate_states(&[StateSpec::gaussian(0.0, 0.0, 1.0 / 12.0)])
            .unwrap();
        let rho = Ensemble::uniform(psi.clone()).unwrap();
        let delta = 0.05;
        let joint = joint_b_distribution(&rho, &fam, 1e-9).unwrap();
        let eps = epsilon_threshold(&joint, delta).unwrap();

        // oracle: unbucketed scan of sorted |v1*v2| directly from momentum
        // amplitudes
        let mom = crate::lattice::transform(&psi[0], Direction::ToMomentum).unwrap();
        let mut atoms: Vec<(f64, f64)> = fam
            .config()
            .p_samples()
            .iter()
            .zip(mom.amplitudes())
            .map(|(&p, a)| {
                (
                    ((fam.b1() * p).cos() * (fam.b2n() * p).cos()).abs(),
                    a.norm_sqr(),
                )
            })
            .collect();
        atoms.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let mut cum = 0.0;
        let mut v_star = 0.0;
        let mut i = 0;
        while i < atoms.len() {
            let m = atoms[i].0;
            while i < atoms.len() && atoms[i].0 == m {
                cum += atoms[i].1;
                i += 1;
            }
            if cum >= 1.0 - delta - 1e-12 {
                v_star = m;
                break;
            }
        }
        assert!(v_star > 0.0);
        assert!(
            (3.0 * eps - v_star).abs() < 1e-9,
            "threshold 3eps = {} vs scan oracle {v_star}",
            3.0 * eps
        );
    }

    #[test]
    fn certificate_arithmetic() {
        let c = contradiction_certificate(0.1, 0.4).unwrap();
        assert!((c.upper_gap - 0.2).abs() < 1e-15);
        assert!((c.lower_gap - 0.6).abs() < 1e-15);
        assert!(c.contradiction);

        let c = contradiction_certificate(0.1, 0.15).unwrap();
        assert!(!c.contradiction);

        // exactly the 3eps margin: lower gap 4eps > 2eps upper gap
        let c = contradiction_certificate(0.1, 0.3).unwrap();
        assert!((c.lower_gap - 0.4).abs() < 1e-15);
        assert!(c.contradiction);

        assert!(contradiction_certificate(0.0, 0.3).is_err());
        assert!(contradiction_certificate(-0.1, 0.3).is_err());
        assert!(contradiction_certificate(0.1, -0.3).is_err());
    }

    #[test]
    fn premise_residuals_exact_rows_small() {
        let fam = make_family(1024, 2, 1, 1.0).unwrap();
        let states = standard_states(&fam);
        let map = premise_residuals(&fam, &states, 2).unwrap();
        for (name, residual) in &map {
            if is_exact_premise(name) {
                assert!(
                    *residual < 1e-10,
                    "premise {name} residual {residual} too large"
                );
            }
        }
        assert!(map.contains_key("delta_b1_k1"));
        assert!(map.contains_key("delta_b1b2n_k2"));
    }

    #[test]
    fn disturbance_premises_shrink_with_n() {
        let states_of = |fam: &ObstructionFamily| standard_states(fam);
        let fam2 = make_family(1024, 2, 1, 1.0).unwrap();
        let fam16 = make_family(1024, 16, 1, 1.0).unwrap();
        let at2 = premise_residuals(&fam2, &states_of(&fam2), 1).unwrap()["delta_b1_k1"];
        let at16 = premise_residuals(&fam16, &states_of(&fam16), 1).unwrap()["delta_b1_k1"];
        assert!(
            at16 * 2.0 <= at2,
            "delta at n=16 ({at16}) not at least 2x smaller than at n=2 ({at2})"
        );
    }

    #[test]
    fn all_a_outcomes_are_plus_minus_one() {
        let fam = make_family(512, 1, 1, 1.0).unwrap();
        let rho = Ensemble::uniform(standard_states(&fam)).unwrap();
        for op in [fam.a1_op(), fam.a2_op()] {
            let hist = outcome_distribution(&rho, op, 1e-9).unwrap();
            let mut total = 0.0;
            for (v, p) in &hist.buckets {
                assert!((v.abs() - 1.0).abs() < 1e-12);
                total += p;
            }
            assert!((total - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn b1_zero_band_probability_is_small() {
        let fam = make_family(2048, 4, 1, 1.0).unwrap();
        let rho = Ensemble::uniform(standard_states(&fam)).unwrap();
        let joint = joint_b_distribution(&rho, &fam, 1e-9).unwrap();
        let p = joint.marginal_v1().probability_within_band(1e-6);
        assert!(p < 1e-3, "P(|v[B1]| <= 1e-6) = {p}");
    }

    #[test]
    fn run_audit_small_passes() {
        let params = AuditParams {
            grid: 512,
            n: 4,
            k_max: 2,
            ..AuditParams::default()
        };
        let report = run_audit(&params).unwrap();
        assert!(report.pass(), "failures: {:?}", report.failures());
        assert!(report.epsilon > 0.01, "epsilon {} is degenerate", report.epsilon);
        let cert = report.certificate.expect("certificate present");
        assert!(cert.contradiction);
        assert!(cert.lower_gap > cert.upper_gap);
        assert!(report.p_threshold >= 1.0 - params.delta - 1e-9);
        let json = report.to_json();
        assert!(json.contains("\"verdict\": \"pass\""));
        let csv = report.to_csv_summary();
        assert!(csv.starts_with("field,value\n"));
    }

    #[test]
    fn run_audit_rejects_bad_delta() {
        let params = AuditParams {
            delta: 0.6,
            ..AuditParams::default()
        };
        match run_audit(&params) {
            Err(Error::InvalidParameter(msg)) => {
                assert!(msg.contains("delta"));
            }
            other => panic!("expected delta rejection, got {other:?}"),
        }
    }

    #[test]
    fn run_audit_rejects_incommensurate_grid() {
        let params = AuditParams {
            grid: 1000,
            n: 3,
            ..AuditParams::default()
        };
        match run_audit(&params) {
            Err(Error::Incommensurate { minimal, .. }) => {
                assert_eq!(minimal, 1008);
            }
            other => panic!("expected incommensurate error, got {other:?}"),
        }
    }
}
