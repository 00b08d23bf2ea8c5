//! Synthetic ratings drawn from the ordinal model, for running the held-out
//! pair evaluation when no real ratings file is available.

use std::io::Write;

use rand::Rng;

use super::{Rating, RatingsTable};
use crate::model::OrdinalModel;
use crate::ranking::PreferenceVector;
use crate::seed::rng_for;
use crate::{Error, Result};

/// Rating scale of the generated table.
pub const RATING_MIN: i32 = 1;
pub const RATING_MAX: i32 = 5;

/// Every item pair gets `users_per_pair` fresh users who rate exactly the two
/// items. Their rating difference `r_i − r_j` is a draw of the ordinal model
/// at `γ = θ_i − θ_j`, and `r_j` is uniform over the values that keep both
/// ratings on the 1–5 scale. Items are numbered from 1.
pub fn synthesize_ratings(
    model: &OrdinalModel,
    theta: &PreferenceVector,
    users_per_pair: usize,
    seed: u64,
) -> Result<RatingsTable> {
    let span = RATING_MAX - RATING_MIN;
    if model.k() > span as usize {
        return Err(Error::domain(format!(
            "K = {} does not fit a {RATING_MIN}..{RATING_MAX} rating scale",
            model.k()
        )));
    }
    if users_per_pair == 0 {
        return Err(Error::domain("users_per_pair must be at least 1"));
    }
    let n = theta.n();
    let mut rows = Vec::with_capacity(n * (n - 1) * users_per_pair);
    let mut user = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            let mut rng = rng_for(seed, &[i as u64, j as u64]);
            let sampler = model.sampler(theta.gamma(i, j));
            for _ in 0..users_per_pair {
                user += 1;
                let y = sampler.draw(&mut rng);
                let lo = RATING_MIN.max(RATING_MIN - y);
                let hi = RATING_MAX.min(RATING_MAX - y);
                let rj = rng.random_range(lo..=hi);
                let stamp = 880_000_000 + user as i64;
                for (item, rating) in [(i, rj + y), (j, rj)] {
                    rows.push(Rating {
                        user,
                        item: item as u64 + 1,
                        rating: rating as f64,
                        timestamp: Some(stamp),
                    });
                }
            }
        }
    }
    Ok(RatingsTable::from_records(rows))
}

/// Writes integer ratings as `user\titem\trating\ttimestamp` lines.
pub fn write_movielens_tab<W: Write>(table: &RatingsTable, mut w: W) -> Result<()> {
    for r in table.records() {
        if r.rating.fract() != 0.0 {
            return Err(Error::domain("tab format needs integer ratings"));
        }
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            r.user,
            r.item,
            r.rating as i64,
            r.timestamp.unwrap_or(0)
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{parse_ratings, RatingsFormat};
    use crate::model::{PatternDistribution, StrengthLink};

    fn model() -> OrdinalModel {
        OrdinalModel::new(StrengthLink::identity(), PatternDistribution::uniform(4).unwrap())
    }

    #[test]
    fn ratings_on_scale_and_differences_from_model() {
        let theta = PreferenceVector::equally_spaced(3, 0.5).unwrap();
        let t = synthesize_ratings(&model(), &theta, 50, 1).unwrap();
        assert_eq!(t.len(), 3 * 50 * 2);
        for r in t.records() {
            assert!((1.0..=5.0).contains(&r.rating));
        }
        for pair in t.records().chunks(2) {
            assert_eq!(pair[0].user, pair[1].user);
            let d = pair[0].rating - pair[1].rating;
            assert!(d != 0.0 && d.abs() <= 4.0);
        }
    }

    #[test]
    fn tab_round_trip() {
        let theta = PreferenceVector::equally_spaced(4, 0.2).unwrap();
        let t = synthesize_ratings(&model(), &theta, 5, 9).unwrap();
        let mut buf = Vec::new();
        write_movielens_tab(&t, &mut buf).unwrap();
        assert_eq!(parse_ratings(buf.as_slice(), RatingsFormat::MovielensTab).unwrap(), t);
    }

    #[test]
    fn rejects_wide_k() {
        let wide = OrdinalModel::new(StrengthLink::identity(), PatternDistribution::uniform(5).unwrap());
        let theta = PreferenceVector::equally_spaced(3, 0.5).unwrap();
        assert!(synthesize_ratings(&wide, &theta, 5, 1).is_err());
    }
}
