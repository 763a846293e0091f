//! Checks the price bounds implied by writing a game as a potential game
//! plus a zero-sum residual.

use rayon::prelude::*;
use serde_json::{json, Value};

use super::congestion::CongestionGame;
use super::potential::four_cycle_violation;
use crate::efficiency::price_report;
use crate::error::{Error, Result};
use crate::game::{Convention, Game, Profile, SolutionSet};
use crate::scalar::Scalar;
use crate::transition::{m_transition_set, StableVariant};

/// A game `game` together with a claimed potential game `potential` such
/// that the difference is zero-sum.
#[derive(Clone, Debug)]
pub struct DecompositionCertificate<V> {
    pub game: Game<V>,
    pub potential: Game<V>,
    /// When the potential game is a congestion game read as utilities.
    pub congestion: Option<CongestionGame<V>>,
}

impl<V: Scalar> DecompositionCertificate<V> {
    pub fn validate(&self) -> Result<()> {
        let (g, p) = (&self.game, &self.potential);
        if g.shape() != p.shape() {
            return Err(Error::CertificateInvalid(
                "game and potential game differ in shape".into(),
            ));
        }
        if g.convention() != Convention::Utility || p.convention() != Convention::Utility {
            return Err(Error::CertificateInvalid(
                "both games must maximise utility".into(),
            ));
        }
        for k in 0..g.num_profiles() {
            let residual = crate::scalar::sum(
                g.payoffs_at(k)
                    .iter()
                    .zip(p.payoffs_at(k))
                    .map(|(u, v)| u.clone() - v.clone()),
            );
            if !residual.is_zero_tol() {
                return Err(Error::CertificateInvalid(format!(
                    "residual sums to {residual} at {:?}, not zero",
                    g.profile_at(k)
                )));
            }
        }
        if let Some(cycle) = four_cycle_violation(p) {
            return Err(Error::CertificateInvalid(format!(
                "potential game fails the four-cycle test at {:?} for players {:?}",
                cycle.profile, cycle.players
            )));
        }
        if let Some(cg) = &self.congestion {
            let induced = cg.to_game(Convention::Utility)?;
            if induced.shape() != p.shape()
                || induced
                    .payoff_table()
                    .iter()
                    .zip(p.payoff_table())
                    .any(|(a, b)| !a.eq_tol(b))
            {
                return Err(Error::CertificateInvalid(
                    "congestion game does not induce the potential game".into(),
                ));
            }
        }
        Ok(())
    }

    /// Largest absolute payoff difference.
    pub fn epsilon(&self) -> V {
        self.game
            .payoff_table()
            .iter()
            .zip(self.potential.payoff_table())
            .map(|(u, v)| (u.clone() - v.clone()).abs_val())
            .fold(V::zero(), V::max_val)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AlphaMode<V> {
    Search,
    Given(V),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioCheck<V> {
    pub alpha: V,
    /// Largest alpha the hypothesis admits.
    pub tightest: V,
    pub hypothesis_holds: bool,
    pub price_g: V,
    pub price_p: V,
    pub ratio: V,
    pub holds: bool,
}

impl<V: Scalar> RatioCheck<V> {
    fn to_json(&self) -> Value {
        json!({
            "alpha": self.alpha.to_json(),
            "tightest_alpha": self.tightest.to_json(),
            "hypothesis_holds": self.hypothesis_holds,
            "price_g": self.price_g.to_json(),
            "price_p": self.price_p.to_json(),
            "abs_ratio": self.ratio.to_json(),
            "holds": self.holds,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorollaryCheck<V> {
    pub superadditive: bool,
    pub bound: V,
    pub m_pota_g: V,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionReport<V> {
    pub epsilon: V,
    pub m: usize,
    pub poa: RatioCheck<V>,
    pub m_pota: RatioCheck<V>,
    pub corollary: Option<CorollaryCheck<V>>,
}

impl<V: Scalar> DecompositionReport<V> {
    pub fn holds(&self) -> bool {
        (!self.poa.hypothesis_holds || self.poa.holds)
            && (!self.m_pota.hypothesis_holds || self.m_pota.holds)
            && self
                .corollary
                .as_ref()
                .is_none_or(|c| !c.superadditive || c.holds)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "epsilon": self.epsilon.to_json(),
            "m": self.m,
            "poa": self.poa.to_json(),
            "m_pota": self.m_pota.to_json(),
            "corollary": self.corollary.as_ref().map(|c| json!({
                "superadditive": c.superadditive,
                "bound": c.bound.to_json(),
                "m_pota_g": c.m_pota_g.to_json(),
                "holds": c.holds,
            })),
            "holds": self.holds(),
        })
    }
}

/// min over `loose` of max over `strict` of |sw(s) / sw(s')|, skipping
/// zero-welfare references.
fn tightest_alpha<V: Scalar>(game: &Game<V>, loose: &[Profile], strict: &[Profile]) -> Result<V> {
    let refs: Vec<V> = strict
        .iter()
        .map(|p| game.sw(p))
        .filter(|v| !v.is_zero_tol())
        .collect();
    if refs.is_empty() {
        return Err(Error::UndefinedPrice {
            measure: "alpha".into(),
            reason: "every reference profile has zero welfare".into(),
        });
    }
    Ok(loose
        .par_iter()
        .map(|s| {
            let sw = game.sw(s);
            refs.iter()
                .map(|r| (sw.clone() / r.clone()).abs_val())
                .reduce(V::max_val)
                .expect("refs nonempty")
        })
        .reduce_with(V::min_val)
        .unwrap_or_else(V::one))
}

fn ratio_check<V: Scalar>(
    mode: &AlphaMode<V>,
    tightest: V,
    price_g: V,
    price_p: V,
) -> RatioCheck<V> {
    let alpha = match mode {
        AlphaMode::Search => tightest.clone(),
        AlphaMode::Given(a) => a.clone(),
    };
    let ratio = if price_p.is_zero_tol() {
        V::zero()
    } else {
        (price_g.clone() / price_p.clone()).abs_val()
    };
    let holds = !price_p.is_zero_tol() && ratio.ge_tol(&alpha);
    RatioCheck {
        hypothesis_holds: alpha.le_tol(&tightest),
        tightest,
        holds,
        alpha,
        price_g,
        price_p,
        ratio,
    }
}

pub fn verify_decomposition_bounds<V: Scalar>(
    cert: &DecompositionCertificate<V>,
    m: usize,
    mode: AlphaMode<V>,
) -> Result<DecompositionReport<V>> {
    cert.validate()?;
    let n = cert.game.num_players();
    if m == 0 || m > n {
        return Err(Error::BadParams(format!("m must lie in 1..={n}")));
    }
    if let AlphaMode::Given(a) = &mode {
        if !a.is_positive() {
            return Err(Error::BadParams("alpha must be positive".into()));
        }
    }
    let (g, p) = (&cert.game, &cert.potential);
    let eps = cert.epsilon();
    let ne_g = g.pure_ne()?;
    let ne_p = p.pure_ne()?;
    let loose: SolutionSet = p.enumerate_pure_ne(&(V::from_int(2) * eps.clone()))?;
    ne_g.ensure_nonempty()?;
    ne_p.ensure_nonempty()?;
    let prices_g = price_report(g, &ne_g, StableVariant::Strict)?;
    let prices_p = price_report(p, &ne_p, StableVariant::Strict)?;

    let alpha_poa = tightest_alpha(p, loose.members(), ne_p.members())?;
    let alpha_m = tightest_alpha(
        p,
        &m_transition_set(&loose, m)?,
        &m_transition_set(&ne_p, m)?,
    )?;
    let poa = ratio_check(
        &mode,
        alpha_poa,
        prices_g.poa.value.clone(),
        prices_p.poa.value.clone(),
    );
    let m_pota = ratio_check(
        &mode,
        alpha_m,
        prices_g.m_pota(m).clone(),
        prices_p.m_pota(m).clone(),
    );
    let corollary = cert.congestion.as_ref().map(|cg| {
        let bound = m_pota.alpha.clone() / V::from_int(m as i64) * prices_p.poa.value.clone();
        let m_pota_g = prices_g.m_pota(m).clone();
        CorollaryCheck {
            superadditive: cg.is_superadditive(),
            holds: m_pota_g.ge_tol(&bound),
            bound,
            m_pota_g,
        }
    });
    Ok(DecompositionReport {
        epsilon: eps,
        m,
        poa,
        m_pota,
        corollary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(s: &str) -> Rational {
        Rational::parse(s).unwrap()
    }

    fn potential() -> Game {
        let phi = [["3", "2.9"], ["1", "2"]];
        Game::from_fn(Convention::Utility, &[2, 2], |s| {
            vec![q(phi[s[0]][s[1]]); 2]
        })
        .unwrap()
    }

    fn perturbed(scale: &str) -> Game {
        let z = [["-1", "1"], ["1", "-1"]];
        let p = potential();
        Game::from_fn(Convention::Utility, &[2, 2], |s| {
            let d = q(z[s[0]][s[1]]) * q(scale);
            vec![p.payoff(s, 0) + d, p.payoff(s, 1) - d]
        })
        .unwrap()
    }

    #[test]
    fn identity_gives_unit_alpha() {
        let cert = DecompositionCertificate {
            game: potential(),
            potential: potential(),
            congestion: None,
        };
        for m in 1..=2 {
            let rep = verify_decomposition_bounds(&cert, m, AlphaMode::Search).unwrap();
            assert_eq!(rep.epsilon, q("0"));
            assert_eq!(rep.poa.alpha, q("1"));
            assert_eq!(rep.poa.ratio, q("1"));
            assert_eq!(rep.m_pota.alpha, q("1"));
            assert_eq!(rep.m_pota.ratio, q("1"));
            assert!(rep.holds());
        }
    }

    #[test]
    fn small_perturbation() {
        let cert = DecompositionCertificate {
            game: perturbed("0.1"),
            potential: potential(),
            congestion: None,
        };
        let rep = verify_decomposition_bounds(&cert, 2, AlphaMode::Search).unwrap();
        assert_eq!(rep.epsilon, q("0.1"));
        // (0, 1) is a 0.2-equilibrium of the potential game worth 5.8 against 6
        assert_eq!(rep.poa.alpha, q("29/30"));
        assert!(rep.poa.holds && rep.m_pota.holds);
    }

    #[test]
    fn given_alpha_above_tightest_breaks_hypothesis() {
        let cert = DecompositionCertificate {
            game: perturbed("0.1"),
            potential: potential(),
            congestion: None,
        };
        let rep = verify_decomposition_bounds(&cert, 1, AlphaMode::Given(q("1"))).unwrap();
        assert!(!rep.poa.hypothesis_holds);
    }

    #[test]
    fn rejects_non_zero_sum_residual() {
        let bumped = potential().map_payoffs(|v| *v + q("0.1"));
        let cert = DecompositionCertificate {
            game: bumped,
            potential: potential(),
            congestion: None,
        };
        assert!(matches!(
            verify_decomposition_bounds(&cert, 1, AlphaMode::Search),
            Err(Error::CertificateInvalid(_))
        ));
    }
}
