//! Games where every player receives the same payoff.

use serde_json::{json, Value};

use crate::efficiency::{price_report, PriceReport};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::scalar::Scalar;
use crate::transition::StableVariant;

pub fn is_identical_utility<V: Scalar>(game: &Game<V>) -> bool {
    (0..game.num_profiles()).all(|k| {
        let row = game.payoffs_at(k);
        row.iter().all(|u| u.eq_tol(&row[0]))
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdenticalReport<V> {
    pub prices: PriceReport<V>,
    pub pos_is_one: bool,
    pub pots_is_one: bool,
}

impl<V: Scalar> IdenticalReport<V> {
    pub fn holds(&self) -> bool {
        self.pos_is_one && self.pots_is_one
    }

    pub fn to_json(&self) -> Value {
        json!({
            "prices": self.prices.to_json(),
            "pos_is_one": self.pos_is_one,
            "pots_is_one": self.pots_is_one,
            "holds": self.holds(),
        })
    }
}

/// Prices over the pure equilibria; an optimal profile is always an
/// equilibrium here so pos and pots must both be 1.
pub fn verify_identical_utility<V: Scalar>(game: &Game<V>) -> Result<IdenticalReport<V>> {
    if !is_identical_utility(game) {
        return Err(Error::NotIdenticalUtility);
    }
    let ne = game.pure_ne()?;
    let prices = price_report(game, &ne, StableVariant::Strict)?;
    Ok(IdenticalReport {
        pos_is_one: prices.pos.value.eq_tol(&V::one()),
        pots_is_one: prices.pots.value.eq_tol(&V::one()),
        prices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Convention;
    use crate::scalar::Rational;

    fn low_poa(eps: Rational, a: Rational) -> Game {
        Game::from_fn(Convention::Utility, &[2, 2], |s| match (s[0], s[1]) {
            (0, 0) => vec![eps, eps],
            (1, 1) => vec![a, a],
            _ => vec![Rational::from_int(0); 2],
        })
        .unwrap()
    }

    #[test]
    fn low_price_of_anarchy() {
        let rep =
            verify_identical_utility(&low_poa(Rational::from_frac(1, 10), Rational::from_int(1)))
                .unwrap();
        assert!(rep.holds());
        assert_eq!(rep.prices.poa.value, Rational::from_frac(1, 10));
        assert_eq!(rep.prices.pota.value, Rational::from_int(0));
        assert_eq!(rep.prices.posta.value, Rational::from_int(0));
    }

    #[test]
    fn constant_game_prices_are_one() {
        let g = Game::from_fn(Convention::Utility, &[2, 3], |_| {
            vec![Rational::from_int(2); 2]
        })
        .unwrap();
        let p = verify_identical_utility(&g).unwrap().prices;
        for v in p.measures().values() {
            assert_eq!(v, &Rational::from_int(1));
        }
    }

    #[test]
    fn rejects_differing_payoffs() {
        let g = Game::from_fn(Convention::Utility, &[2], |s| {
            vec![Rational::from_int(s[0] as i64)]
        })
        .unwrap();
        assert!(verify_identical_utility(&g).is_ok());
        let g = Game::from_fn(Convention::Utility, &[2, 2], |s| {
            vec![
                Rational::from_int(s[0] as i64),
                Rational::from_int(s[1] as i64),
            ]
        })
        .unwrap();
        assert!(matches!(
            verify_identical_utility(&g),
            Err(Error::NotIdenticalUtility)
        ));
    }
}
