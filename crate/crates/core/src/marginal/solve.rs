//! Stationary distribution of a truncated marginal chain.
//!
//! The state space is the box `{0..=L}^d` intersected with the admissible
//! configurations, explored from the origin; jumps leaving the box are
//! dropped. The balance equations are solved by sparse state reduction
//! (Grassmann–Taksar–Heyman), eliminating states in minimum-degree order,
//! which involves no subtractions and is exact on birth–death structures.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use super::{MarginalChain, MarginalError, Method, StationaryDist};

/// Enumerates the truncated state space and its transition rates.
pub(crate) struct Truncated {
    pub states: Vec<Vec<u32>>,
    // (from, to, rate), from != to
    pub rates: Vec<(u32, u32, f64)>,
    pub limit: u32,
}

pub(crate) fn truncate(chain: &MarginalChain, limit: u32, max_states: usize) -> Result<Truncated, MarginalError> {
    let d = chain.dim();
    let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut states = vec![vec![0u32; d]];
    index.insert(states[0].clone(), 0);
    let mut queue = VecDeque::from([0u32]);
    let mut rates = Vec::new();
    while let Some(s) = queue.pop_front() {
        let x = states[s as usize].clone();
        for l in 0..d {
            if x[l] < limit {
                let r = chain.up_rate(&x, l);
                if r > 0.0 {
                    let mut y = x.clone();
                    y[l] += 1;
                    let t = match index.get(&y) {
                        Some(&t) => t,
                        None => {
                            if states.len() >= max_states {
                                return Err(MarginalError::TooManyStates { limit: max_states });
                            }
                            let t = states.len() as u32;
                            index.insert(y.clone(), t);
                            states.push(y);
                            queue.push_back(t);
                            t
                        }
                    };
                    rates.push((s, t, r));
                }
            }
            if x[l] > 0 {
                let r = chain.down_rate(&x, l);
                if r > 0.0 {
                    let mut y = x.clone();
                    y[l] -= 1;
                    // Every state reachable upward from the origin is also in
                    // the index by the time its down-neighbor is visited.
                    let t = *index.get(&y).expect("down move stays in explored space");
                    rates.push((s, t, r));
                }
            }
        }
    }
    Ok(Truncated { states, rates, limit })
}

/// A state removed by GTH: its index, its in-neighbors at that point, and its total outflow.
type Eliminated = (u32, Vec<(u32, f64)>, f64);

/// Unnormalized stationary vector of the generator given by `rates`.
pub(crate) fn gth(n: usize, rates: &[(u32, u32, f64)]) -> Result<Vec<f64>, MarginalError> {
    let mut out: Vec<HashMap<u32, f64>> = vec![HashMap::new(); n];
    let mut inc: Vec<HashMap<u32, f64>> = vec![HashMap::new(); n];
    for &(i, j, r) in rates {
        *out[i as usize].entry(j).or_insert(0.0) += r;
        *inc[j as usize].entry(i).or_insert(0.0) += r;
    }
    let mut alive = vec![true; n];
    // State 0 (the origin of the marginal chain, where the mass sits) is
    // kept for last so that back substitution grows away from it.
    let key = |k: usize, out: &[HashMap<u32, f64>], inc: &[HashMap<u32, f64>]| {
        if k == 0 {
            usize::MAX
        } else {
            out[k].len() + inc[k].len()
        }
    };
    let mut heap: BinaryHeap<Reverse<(usize, u32)>> = (0..n).map(|k| Reverse((key(k, &out, &inc), k as u32))).collect();
    let mut order: Vec<Eliminated> = Vec::with_capacity(n);
    let mut remaining = n;
    let mut last = 0u32;
    while let Some(Reverse((deg, k))) = heap.pop() {
        let ku = k as usize;
        if !alive[ku] || deg != key(ku, &out, &inc) {
            continue;
        }
        if remaining == 1 {
            last = k;
            break;
        }
        alive[ku] = false;
        remaining -= 1;
        let outs: Vec<(u32, f64)> = out[ku].drain().collect();
        let ins: Vec<(u32, f64)> = inc[ku].drain().collect();
        let s: f64 = outs.iter().map(|e| e.1).sum();
        if s <= 0.0 {
            return Err(MarginalError::Reducible);
        }
        for &(j, _) in &outs {
            inc[j as usize].remove(&k);
        }
        for &(i, _) in &ins {
            out[i as usize].remove(&k);
        }
        for &(i, a_ik) in &ins {
            for &(j, a_kj) in &outs {
                if i != j {
                    let w = a_ik * a_kj / s;
                    *out[i as usize].entry(j).or_insert(0.0) += w;
                    *inc[j as usize].entry(i).or_insert(0.0) += w;
                }
            }
        }
        let mut touched: Vec<u32> = ins.iter().chain(&outs).map(|e| e.0).collect();
        touched.sort_unstable();
        touched.dedup();
        for t in touched {
            let tu = t as usize;
            heap.push(Reverse((key(tu, &out, &inc), t)));
        }
        order.push((k, ins, s));
    }
    if remaining != 1 {
        return Err(MarginalError::Reducible);
    }
    let mut pi = vec![0.0; n];
    // Whether a state is fed by the last one; tracked apart from `pi`,
    // which may underflow to zero far out in a geometric tail.
    let mut fed = vec![false; n];
    pi[last as usize] = 1.0;
    fed[last as usize] = true;
    for (k, ins, s) in order.into_iter().rev() {
        let v = ins.iter().map(|&(i, a)| pi[i as usize] * a).sum::<f64>() / s;
        pi[k as usize] = v;
        fed[k as usize] = ins.iter().any(|&(i, _)| fed[i as usize]);
        if v > 1e200 {
            pi.iter_mut().for_each(|p| *p /= v);
        }
    }
    if fed.contains(&false) {
        return Err(MarginalError::Reducible);
    }
    Ok(pi)
}

/// Largest absolute imbalance `|inflow - outflow|` over the states.
pub(crate) fn residual(n: usize, rates: &[(u32, u32, f64)], pi: &[f64]) -> f64 {
    let mut net = vec![0.0; n];
    for &(i, j, r) in rates {
        let f = pi[i as usize] * r;
        net[i as usize] -= f;
        net[j as usize] += f;
    }
    net.iter().fold(0.0, |m, v: &f64| m.max(v.abs()))
}

// Gauss–Seidel sweeps on the balance equations, renormalizing each time.
fn refine(n: usize, rates: &[(u32, u32, f64)], pi: &mut [f64], tol: f64, sweeps: usize) -> f64 {
    let mut outflow = vec![0.0; n];
    let mut inlist: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for &(i, j, r) in rates {
        outflow[i as usize] += r;
        inlist[j as usize].push((i, r));
    }
    let mut res = residual(n, rates, pi);
    for _ in 0..sweeps {
        if res < tol {
            break;
        }
        for k in 0..n {
            pi[k] = inlist[k].iter().map(|&(i, r)| pi[i as usize] * r).sum::<f64>() / outflow[k];
        }
        let z: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= z);
        res = residual(n, rates, pi);
    }
    res
}

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_STATES: usize = 400_000;

/// Stationary law of `chain` on the box of side `limit`.
pub fn stationary_numeric(chain: &MarginalChain, limit: u32, tol: f64) -> Result<StationaryDist, MarginalError> {
    stationary_numeric_capped(chain, limit, tol, DEFAULT_MAX_STATES)
}

pub fn stationary_numeric_capped(
    chain: &MarginalChain,
    limit: u32,
    tol: f64,
    max_states: usize,
) -> Result<StationaryDist, MarginalError> {
    let tr = truncate(chain, limit, max_states)?;
    let n = tr.states.len();
    let mut pi = gth(n, &tr.rates)?;
    let z: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= z);
    let mut res = residual(n, &tr.rates, &pi);
    if res >= tol {
        res = refine(n, &tr.rates, &mut pi, tol, 10_000);
        if res >= tol {
            return Err(MarginalError::NotConverged { residual: res });
        }
    }
    let tail_mass = tr.states.iter().zip(&pi).filter(|(x, _)| x.contains(&tr.limit)).map(|(_, p)| p).sum();
    Ok(StationaryDist::new(tr.states, pi, tail_mass, Method::NumericTruncated))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_state_chain() {
        // 0 -> 1 at rate 2, 1 -> 0 at rate 3: pi = (3/5, 2/5)
        let pi = gth(2, &[(0, 1, 2.0), (1, 0, 3.0)]).unwrap();
        let z = pi[0] + pi[1];
        assert!((pi[0] / z - 0.6).abs() < 1e-15);
    }

    #[test]
    fn birth_death_oracle() {
        // M/M/1 truncated at 30: geometric with ratio 0.4
        let rates: Vec<_> = (0..30u32).flat_map(|k| [(k, k + 1, 0.4), (k + 1, k, 1.0)]).collect();
        let pi = gth(31, &rates).unwrap();
        let z: f64 = pi.iter().sum();
        let norm = (1.0 - 0.4f64.powi(31)) / 0.6;
        for (k, p) in pi.iter().enumerate() {
            assert!((p / z - 0.4f64.powi(k as i32) / norm).abs() < 1e-14);
        }
    }

    #[test]
    fn cyclic_chain() {
        // 0 -> 1 -> 2 -> 0 with rates 1, 2, 4: pi proportional to 1/rate
        let pi = gth(3, &[(0, 1, 1.0), (1, 2, 2.0), (2, 0, 4.0)]).unwrap();
        let z: f64 = pi.iter().sum();
        let w = [1.0, 0.5, 0.25];
        let wz: f64 = w.iter().sum();
        for k in 0..3 {
            assert!((pi[k] / z - w[k] / wz).abs() < 1e-15);
        }
    }

    #[test]
    fn absorbing_state_is_reducible() {
        assert_eq!(gth(3, &[(0, 1, 1.0), (1, 2, 1.0)]), Err(MarginalError::Reducible));
    }

    #[test]
    fn underflowing_tail_is_not_reducible() {
        // ratio 1e-3 over 400 levels goes far below the smallest double
        let rates: Vec<_> = (0..400u32).flat_map(|k| [(k, k + 1, 1e-3), (k + 1, k, 1.0)]).collect();
        let pi = gth(401, &rates).unwrap();
        assert_eq!(pi[400], 0.0);
        assert!((pi[1] / pi[0] - 1e-3).abs() < 1e-15);
        // reversed: the mass sits at the far end and must not overflow
        let rates: Vec<_> = (0..400u32).flat_map(|k| [(k, k + 1, 1.0), (k + 1, k, 1e-3)]).collect();
        let pi = gth(401, &rates).unwrap();
        assert!(pi.iter().all(|p| p.is_finite()));
        assert!((pi[399] / pi[400] - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn unreachable_transient_state_is_reducible() {
        // 2 feeds the recurrent pair {0, 1} but nothing feeds 2
        assert_eq!(gth(3, &[(0, 1, 1.0), (1, 0, 1.0), (2, 0, 1.0)]), Err(MarginalError::Reducible));
    }
}
