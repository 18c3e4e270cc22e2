//! Random fixtures for property tests.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dist::DiscreteDistribution;
use crate::error::InstanceError;
use crate::mdp::{LayeredMdp, MdpMeta, StateAction};

use super::prophet::simplex_uniform;

/// Random instance with Dirichlet(1) kernel rows and two-point rewards on
/// `[0, 1/H]`, so any episode total is at most one.
///
/// With `ordered` set, rows put mass only on levels `<= l`, the start is the
/// top level, and each state's rows are sorted by stay probability along a
/// random action permutation, which becomes the known ordering.
pub fn random_generic<R: Rng + ?Sized>(
    horizon: usize,
    width: usize,
    num_actions: usize,
    rng: &mut R,
    ordered: bool,
) -> Result<LayeredMdp, InstanceError> {
    if horizon == 0 || width == 0 || num_actions == 0 {
        return Err(InstanceError::InvalidSpec("H, k and A must be positive".into()));
    }
    if ordered && width > horizon {
        return Err(InstanceError::InvalidSpec(format!(
            "ordered instances need k <= H (k = {width}, H = {horizon})"
        )));
    }
    let cap = 1.0 / horizon as f64;
    let mut sas = Vec::with_capacity(horizon * width * num_actions);
    let mut ordering = Vec::with_capacity(horizon * width);
    for stage in 0..horizon {
        let terminal = stage + 1 == horizon;
        for level in 0..width {
            let mut rows: Vec<Vec<f64>> = (0..num_actions)
                .map(|_| {
                    let reach = if ordered { level + 1 } else { width };
                    let mut row = simplex_uniform(reach, rng);
                    row.resize(width, 0.0);
                    row
                })
                .collect();
            let mut perm: Vec<usize> = (0..num_actions).collect();
            if ordered {
                perm.shuffle(rng);
                rows.sort_by(|a, b| a[level].total_cmp(&b[level]));
                let mut placed = vec![Vec::new(); num_actions];
                for (rank, &action) in perm.iter().enumerate() {
                    placed[action] = std::mem::take(&mut rows[rank]);
                }
                rows = placed;
                ordering.push(perm);
            }
            for row in rows {
                let mut pts = [rng.gen::<f64>() * cap, rng.gen::<f64>() * cap];
                pts.sort_by(f64::total_cmp);
                let p = rng.gen::<f64>();
                let reward = DiscreteDistribution::from_pairs(vec![(pts[0], p), (pts[1], 1.0 - p)])?;
                sas.push(if terminal {
                    StateAction::terminal(reward)
                } else {
                    StateAction { reward, next: vec![row] }
                });
            }
        }
    }
    let start = if ordered { width - 1 } else { 0 };
    let mdp = LayeredMdp::from_parts(
        horizon,
        width,
        num_actions,
        start,
        sas,
        ordered.then_some(ordering),
    )?
    .with_meta(MdpMeta {
        name: format!("random H={horizon} k={width} A={num_actions}{}", if ordered { " ordered" } else { "" }),
        value_scale: 1.0,
    });
    Ok(mdp)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::mdp::validate;

    #[test]
    fn fuzz_validates() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..300 {
            let h = 1 + i % 6;
            let k = 1 + i % 4;
            let a = 1 + i % 3;
            let m = random_generic(h, k, a, &mut rng, false).unwrap();
            assert!(validate(&m).is_ok(), "{}", validate(&m));
            if k <= h {
                let m = random_generic(h, k, a, &mut rng, true).unwrap();
                assert!(validate(&m).is_ok(), "{}", validate(&m));
                assert!(m.is_ordered());
            }
        }
    }

    #[test]
    fn reproducible() {
        let a = random_generic(3, 2, 2, &mut ChaCha8Rng::seed_from_u64(9), true).unwrap();
        let b = random_generic(3, 2, 2, &mut ChaCha8Rng::seed_from_u64(9), true).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert!(random_generic(2, 3, 2, &mut ChaCha8Rng::seed_from_u64(9), true).is_err());
    }
}
