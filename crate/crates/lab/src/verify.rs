//! Property checks behind the `verify` subcommand and the acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nudd_core::coefficients::{
    coefficient, fourier_profile, oracle_coefficient, outer_decomposition, zero_threshold, ErrorWord, FourierReport,
    FourierTarget,
};
use nudd_core::errortypes::ErrorVector;
use nudd_core::{MpReal, NuddSpec, Precision};

pub fn random_word<R: Rng>(rng: &mut R, ell: usize, n: usize) -> ErrorWord {
    let v = (0..n).map(|_| ErrorVector::new(rng.random_range(0..1u32 << ell), ell)).collect();
    ErrorWord::new(v).expect("equal lengths by construction")
}

pub fn random_spec<R: Rng>(rng: &mut R, ell: usize, max_order: u32) -> NuddSpec {
    let orders: Vec<u32> = (0..ell).map(|_| rng.random_range(1..=max_order)).collect();
    NuddSpec::new(&orders).expect("small valid orders")
}

/// `|a − b| / max(|a|, |b|, 1/n!)`; `1/n!` bounds every length-n coefficient,
/// so vanishing coefficients are compared on that natural scale.
pub fn relative_gap(a: &MpReal, b: &MpReal, n: usize, prec: Precision) -> MpReal {
    let mut scale = MpReal::one(prec);
    for k in 2..=n as i64 {
        scale = scale.div_i64(k);
    }
    let denom = a.abs().max(&b.abs()).max(&scale);
    &(a - b).abs() / &denom
}

#[derive(Clone, Debug)]
pub struct DecompositionCheck {
    pub spec: NuddSpec,
    pub word: ErrorWord,
    pub relative: MpReal,
}

/// Outer-layer decomposition against direct evaluation on random words.
pub fn decomposition_checks<F>(trials: usize, seed: u64, prec: Precision, mut pick_spec: F) -> nudd_core::Result<Vec<DecompositionCheck>>
where
    F: FnMut(&mut ChaCha8Rng) -> NuddSpec,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    for _ in 0..trials {
        let spec = pick_spec(&mut rng);
        let n = rng.random_range(1..=4usize);
        let word = random_word(&mut rng, spec.ell(), n);
        let d = outer_decomposition(&spec, &word, prec)?;
        let relative = relative_gap(&d.direct, &d.decomposed, n, prec);
        out.push(DecompositionCheck { spec, word, relative });
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct OracleCheck {
    pub spec: NuddSpec,
    pub word: ErrorWord,
    pub exact: MpReal,
    /// Oracle errors at refinement `base` and `2·base`.
    pub errors: (MpReal, MpReal),
    pub observed_order: f64,
}

/// `log2(e(h)/e(h/2))` for the trapezoid oracle.
pub fn oracle_order(spec: &NuddSpec, word: &ErrorWord, prec: Precision, base: usize) -> nudd_core::Result<OracleCheck> {
    let exact = coefficient(spec, word, prec)?;
    let e1 = (&oracle_coefficient(spec, word, prec, base)? - &exact).abs();
    let e2 = (&oracle_coefficient(spec, word, prec, 2 * base)? - &exact).abs();
    let observed_order = if e2.is_zero() { f64::INFINITY } else { (e1.log10_abs_f64() - e2.log10_abs_f64()) / core::f64::consts::LOG10_2 };
    Ok(OracleCheck { spec: spec.clone(), word: word.clone(), exact, errors: (e1, e2), observed_order })
}

/// Oracle convergence on `count` random words of length 3..=4 whose exact
/// coefficient is clearly nonzero and whose oracle error is resolvable at the
/// base grid (the rule is exact below length 3, and on some longer words).
pub fn oracle_checks<F>(count: usize, seed: u64, prec: Precision, base: usize, mut pick_spec: F) -> nudd_core::Result<Vec<OracleCheck>>
where
    F: FnMut(&mut ChaCha8Rng) -> NuddSpec,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 100 * count.max(1) {
            return Err(nudd_core::Error::InvalidArgument("could not draw enough nonvanishing words".into()));
        }
        let spec = pick_spec(&mut rng);
        let n = rng.random_range(3..=4usize);
        let word = random_word(&mut rng, spec.ell(), n);
        let exact = coefficient(&spec, &word, prec)?;
        // Far above the vanishing threshold.
        if exact.abs() <= &zero_threshold(n, prec) * &MpReal::pow10(30, prec) {
            continue;
        }
        let check = oracle_order(&spec, &word, prec, base)?;
        // Some words are integrated exactly by the rule (error at round-off);
        // they carry no convergence information.
        if check.errors.0 <= prec.tolerance(20) {
            continue;
        }
        out.push(check);
    }
    Ok(out)
}

/// Fourier-class reports for every layer and for the angle-map Jacobian.
pub fn fourier_checks(spec: &NuddSpec, prec: Precision) -> nudd_core::Result<Vec<FourierReport>> {
    let outer = spec.order(spec.ell() - 1);
    let m_max = 6 * (outer + 1) + 2;
    let mut targets: Vec<FourierTarget> = (0..spec.ell()).map(FourierTarget::Layer).collect();
    targets.push(FourierTarget::Jacobian);
    targets.into_iter().map(|t| fourier_profile(spec, t, m_max, prec)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_is_second_order() {
        let prec = Precision::new(40).unwrap();
        let spec = NuddSpec::new(&[2]).unwrap();
        let word: ErrorWord = "1 1 1".parse().unwrap();
        let c = oracle_order(&spec, &word, prec, 16).unwrap();
        assert!((c.observed_order - 2.0).abs() < 0.1, "{}", c.observed_order);
    }
}
