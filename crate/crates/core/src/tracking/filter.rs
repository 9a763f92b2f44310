use nalgebra::{Matrix2, Matrix2x4, Matrix4, Vector2};

use super::{GaussianComponent, PhdParams, StateCovariance};
use crate::error::{Error, Result};
use crate::perception::Detection;

fn transition(dt: f64) -> Matrix4<f64> {
    let mut f = Matrix4::identity();
    f[(0, 2)] = dt;
    f[(1, 3)] = dt;
    f
}

/// Discrete white-acceleration process noise.
fn process_noise(dt: f64, accel_std: f64) -> Matrix4<f64> {
    let q = accel_std * accel_std;
    let (a, b, c) = (dt.powi(4) / 4.0 * q, dt.powi(3) / 2.0 * q, dt * dt * q);
    Matrix4::new(
        a, 0.0, b, 0.0, //
        0.0, a, 0.0, b, //
        b, 0.0, c, 0.0, //
        0.0, b, 0.0, c,
    )
}

fn observation() -> Matrix2x4<f64> {
    Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
}

fn symmetrize(m: &StateCovariance) -> StateCovariance {
    (m + m.transpose()) * 0.5
}

/// Propagates every component under constant velocity, scales weights by the
/// survival probability and appends the birth components.
pub fn phd_predict(
    mixture: &[GaussianComponent],
    params: &PhdParams,
    dt: f64,
) -> Vec<GaussianComponent> {
    let f = transition(dt);
    let q = process_noise(dt, params.process_noise);
    mixture
        .iter()
        .map(|c| GaussianComponent {
            weight: params.p_survival * c.weight,
            mean: f * c.mean,
            covariance: symmetrize(&(f * c.covariance * f.transpose() + q)),
        })
        .chain(params.birth_components.iter().cloned())
        .collect()
}

struct UpdateTerms {
    predicted_z: Vector2<f64>,
    s_inv: Matrix2<f64>,
    norm: f64,
    gain: nalgebra::Matrix4x2<f64>,
    covariance: StateCovariance,
}

/// Standard GM-PHD measurement update. The output lists the missed-detection
/// copies first, followed by one Kalman-updated copy of every component per
/// detection, in detection order.
pub fn phd_update(
    mixture: &[GaussianComponent],
    detections: &[Detection],
    params: &PhdParams,
) -> Result<Vec<GaussianComponent>> {
    let h = observation();
    let r = Matrix2::identity() * params.meas_noise.powi(2);
    let pd = params.p_detect;

    let mut out: Vec<GaussianComponent> = mixture
        .iter()
        .map(|c| GaussianComponent {
            weight: (1.0 - pd) * c.weight,
            ..c.clone()
        })
        .collect();
    if detections.is_empty() {
        return Ok(out);
    }

    let terms = mixture
        .iter()
        .map(|c| {
            let s = h * c.covariance * h.transpose() + r;
            let det = s.determinant();
            if !(det.is_finite() && det > f64::EPSILON * s.norm().powi(2).max(f64::MIN_POSITIVE)) {
                return Err(Error::SingularInnovation);
            }
            let s_inv = s.try_inverse().ok_or(Error::SingularInnovation)?;
            let gain = c.covariance * h.transpose() * s_inv;
            let covariance = symmetrize(&((Matrix4::identity() - gain * h) * c.covariance));
            Ok(UpdateTerms {
                predicted_z: h * c.mean,
                s_inv,
                norm: 1.0 / (crate::world::TAU * det.sqrt()),
                gain,
                covariance,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    for det in detections {
        let z = Vector2::new(det.centroid[0], det.centroid[1]);
        let start = out.len();
        let mut total = 0.0;
        for (c, t) in mixture.iter().zip(&terms) {
            let innovation = z - t.predicted_z;
            let mahal = (innovation.transpose() * t.s_inv * innovation)[(0, 0)];
            let w = pd * c.weight * t.norm * (-0.5 * mahal).exp();
            total += w;
            out.push(GaussianComponent {
                weight: w,
                mean: c.mean + t.gain * innovation,
                covariance: t.covariance,
            });
        }
        let denom = params.clutter_intensity + total;
        for comp in &mut out[start..] {
            comp.weight = if denom > 0.0 {
                comp.weight / denom
            } else {
                0.0
            };
        }
    }
    Ok(out)
}

/// Prunes low-weight components, merges components near the strongest
/// remaining one (moment-preserving), then keeps at most `max_components`
/// by descending weight.
pub fn prune_merge(mixture: &[GaussianComponent], params: &PhdParams) -> Vec<GaussianComponent> {
    let mut pool: Vec<&GaussianComponent> = mixture
        .iter()
        .filter(|c| c.weight >= params.prune_threshold)
        .collect();
    let inverses: Vec<Option<Matrix4<f64>>> = pool
        .iter()
        .map(|c| c.covariance.cholesky().map(|ch| ch.inverse()))
        .collect();
    let mut alive = vec![true; pool.len()];
    let mut merged = Vec::new();

    loop {
        // strongest survivor, first index on ties
        let mut best: Option<usize> = None;
        for i in (0..pool.len()).filter(|&i| alive[i]) {
            if best.is_none_or(|b| pool[i].weight > pool[b].weight) {
                best = Some(i);
            }
        }
        let Some(j) = best else { break };

        let group: Vec<usize> = (0..pool.len())
            .filter(|&i| alive[i])
            .filter(|&i| {
                if i == j {
                    return true;
                }
                let Some(inv) = &inverses[i] else {
                    return false;
                };
                let d = pool[i].mean - pool[j].mean;
                (d.transpose() * inv * d)[(0, 0)] <= params.merge_threshold
            })
            .collect();

        let weight: f64 = group.iter().map(|&i| pool[i].weight).sum();
        let comp = if group.len() == 1 {
            pool[j].clone()
        } else {
            let mean = group.iter().fold(super::StateVector::zeros(), |acc, &i| {
                acc + pool[i].mean * pool[i].weight
            }) / weight;
            let cov = group.iter().fold(StateCovariance::zeros(), |acc, &i| {
                let d = mean - pool[i].mean;
                acc + (pool[i].covariance + d * d.transpose()) * pool[i].weight
            }) / weight;
            GaussianComponent::new(weight, mean, symmetrize(&cov))
        };
        for &i in &group {
            alive[i] = false;
        }
        merged.push(comp);
    }
    pool.clear();

    // already in non-increasing weight order except where merging raised a later group
    merged.sort_by(|a, b| b.weight.total_cmp(&a.weight));
    merged.truncate(params.max_components);
    merged
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracking::{expected_count, StateVector};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params_without_birth() -> PhdParams {
        PhdParams {
            birth_components: vec![],
            ..PhdParams::default()
        }
    }

    fn comp(w: f64, m: [f64; 4], var: f64) -> GaussianComponent {
        GaussianComponent::new(w, StateVector::from(m), StateCovariance::identity() * var)
    }

    fn det(e: f64, n: f64) -> Detection {
        Detection {
            centroid: [e, n],
            extent: [1.0, 1.0],
            point_count: 10,
            timestamp: 0.0,
        }
    }

    #[test]
    fn predict_with_tiny_dt_is_identity() {
        let p = PhdParams {
            p_survival: 1.0,
            ..params_without_birth()
        };
        let m = vec![comp(0.7, [1.0, 2.0, 3.0, 4.0], 2.0)];
        let out = phd_predict(&m, &p, 1e-12);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].weight, 0.7);
        assert_relative_eq!(out[0].mean, m[0].mean, epsilon = 1e-9);
    }

    #[test]
    fn predict_constant_velocity() {
        let out = phd_predict(
            &[comp(1.0, [0.0, 0.0, 1.0, 0.0], 1.0)],
            &params_without_birth(),
            2.0,
        );
        assert_relative_eq!(out[0].mean[0], 2.0);
        assert_relative_eq!(out[0].mean[1], 0.0);
    }

    #[test]
    fn predict_weight_accounting() {
        let p = PhdParams::default();
        let m: Vec<_> = (0..7)
            .map(|i| comp(0.1 * i as f64 + 0.05, [i as f64, 0.0, 0.0, 1.0], 1.0))
            .collect();
        let out = phd_predict(&m, &p, 0.7);
        let expected = p.p_survival * m.iter().map(|c| c.weight).sum::<f64>()
            + p.birth_components.iter().map(|c| c.weight).sum::<f64>();
        assert!((expected_count(&out) - expected).abs() < 1e-12);
    }

    #[test]
    fn empty_update_scales_weights() {
        let p = params_without_birth();
        let m = vec![comp(0.8, [1.0, 1.0, 0.0, 0.0], 3.0)];
        let out = phd_update(&m, &[], &p).unwrap();
        assert_eq!(out.len(), 1);
        assert_relative_eq!(out[0].weight, 0.8 * (1.0 - p.p_detect));
        assert_eq!(out[0].mean, m[0].mean);
        assert_eq!(out[0].covariance, m[0].covariance);
    }

    #[test]
    fn detection_at_mean_drives_weight_to_one() {
        for prior in [1e-3, 0.2, 5.0] {
            let p = PhdParams {
                p_detect: 1.0 - 1e-12,
                clutter_intensity: 1e-15,
                ..params_without_birth()
            };
            let out = phd_update(
                &[comp(prior, [3.0, 4.0, 0.0, 0.0], 2.0)],
                &[det(3.0, 4.0)],
                &p,
            )
            .unwrap();
            assert_relative_eq!(out[1].weight, 1.0, epsilon = 1e-9);
            assert_relative_eq!(out[1].mean[0], 3.0);
        }
    }

    #[test]
    fn singular_innovation_is_an_error() {
        let p = PhdParams {
            meas_noise: 0.0,
            ..params_without_birth()
        };
        let m = vec![GaussianComponent::new(
            1.0,
            StateVector::zeros(),
            StateCovariance::zeros(),
        )];
        assert!(matches!(
            phd_update(&m, &[det(0.0, 0.0)], &p),
            Err(Error::SingularInnovation)
        ));
    }

    #[test]
    fn merge_identical_components() {
        let p = params_without_birth();
        let c = comp(0.3, [1.0, 2.0, 0.5, 0.5], 2.0);
        let out = prune_merge(&[c.clone(), c.clone()], &p);
        assert_eq!(out.len(), 1);
        assert_relative_eq!(out[0].weight, 0.6);
        assert_relative_eq!(out[0].mean, c.mean, epsilon = 1e-12);
        assert_relative_eq!(out[0].covariance, c.covariance, epsilon = 1e-12);
    }

    #[test]
    fn separated_components_pass_through() {
        let p = params_without_birth();
        let m = vec![
            comp(0.9, [0.0, 0.0, 0.0, 0.0], 1.0),
            comp(0.4, [100.0, 0.0, 0.0, 0.0], 1.0),
        ];
        assert_eq!(prune_merge(&m, &p), m);
    }

    #[test]
    fn random_mixture_bookkeeping() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let p = PhdParams {
                prune_threshold: 0.05,
                max_components: 12,
                ..params_without_birth()
            };
            let m: Vec<_> = (0..50)
                .map(|_| {
                    comp(
                        rng.random_range(0.0..0.3),
                        [
                            rng.random_range(-20.0..20.0),
                            rng.random_range(-20.0..20.0),
                            0.0,
                            0.0,
                        ],
                        rng.random_range(0.5..4.0),
                    )
                })
                .collect();
            let out = prune_merge(&m, &p);

            // bookkeeping oracle: replay prune, merge into groups by weight, and cap
            let kept: f64 = m
                .iter()
                .filter(|c| c.weight >= p.prune_threshold)
                .map(|c| c.weight)
                .sum();
            let merged_only = prune_merge(
                &m,
                &PhdParams {
                    max_components: usize::MAX,
                    ..p.clone()
                },
            );
            assert!((expected_count(&merged_only) - kept).abs() < 1e-12);
            let mut ws: Vec<f64> = merged_only.iter().map(|c| c.weight).collect();
            ws.sort_by(|a, b| b.total_cmp(a));
            let capped: f64 = ws.iter().skip(p.max_components).sum();
            assert!((expected_count(&out) - (kept - capped)).abs() < 1e-12);
            assert!(out.len() <= p.max_components);
        }
    }

    fn spd() -> impl Strategy<Value = StateCovariance> {
        prop::collection::vec(-2.0..2.0f64, 16).prop_map(|v| {
            let a = StateCovariance::from_vec(v);
            a * a.transpose() + StateCovariance::identity() * 0.1
        })
    }

    proptest! {
        #[test]
        fn covariances_stay_spd(cov in spd(), w in 0.01..2.0f64, dt in 0.1..3.0f64, ze in -10.0..10.0f64, zn in -10.0..10.0f64) {
            let p = PhdParams::default();
            let m = vec![GaussianComponent::new(w, StateVector::new(1.0, -1.0, 0.5, 0.0), cov)];
            let predicted = phd_predict(&m, &p, dt);
            let updated = phd_update(&predicted, &[det(ze, zn)], &p).unwrap();
            for c in predicted.iter().chain(&updated).chain(&prune_merge(&updated, &p)) {
                prop_assert!(c.is_valid(), "{:?}", c);
            }
        }
    }
}
