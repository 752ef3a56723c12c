//! Randomised consistency checks of the detector and the LLR bridge against
//! brute-force references. Shared by the `oracle-check` command and the
//! acceptance tests.

use num_complex::Complex64;
use rand::Rng;

use crate::bridge::{bits_to_symbol_llr, symbol_to_bit_llr};
use crate::channel::{draw_channel, transmit, ChannelModel};
use crate::codebook::{Codebook, FactorGraph};
use crate::detector::{detect_log, detect_prob, exact_map_oracle, softmax, LogMpa, SymbolLlr};
use crate::error::Result;
use crate::logsum::LogSumMode;
use crate::rng::seeded;

/// Worst deviation seen by one check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub cases: usize,
    pub worst: f64,
    pub tolerance: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

/// Three users on two resources forming a chain `u0 - r0 - u1 - r1 - u2`:
/// the middle user spreads over both resources, the outer ones use one each.
pub fn tree_codebook() -> Codebook {
    let base = Codebook::default_scma();
    let labels: Vec<Vec<u8>> = (0..4).map(|m| base.label_bits(0, m)).collect();
    let zero = Complex64::new(0.0, 0.0);
    let single = |j: usize, k: usize| -> Vec<Vec<Complex64>> {
        // one nonzero entry, rescaled to unit energy
        let s = base.support(j)[0];
        let e = (0..4).map(|m| base.entry(j, m, s).norm_sqr()).sum::<f64>() / 4.0;
        (0..4)
            .map(|m| {
                let mut w = vec![zero; 2];
                w[k] = base.entry(j, m, s) / e.sqrt();
                w
            })
            .collect()
    };
    let middle: Vec<Vec<Complex64>> = (0..4)
        .map(|m| {
            let s = base.support(1);
            vec![base.entry(1, m, s[0]), base.entry(1, m, s[1])]
        })
        .collect();
    Codebook::new(
        2,
        vec![single(0, 0), middle, single(2, 1)],
        vec![labels.clone(), labels.clone(), labels],
    )
    .expect("valid tree codebook")
}

/// Longest shortest path between two user nodes, counted in resource hops.
fn user_diameter(fg: &FactorGraph) -> usize {
    let mut worst = 0;
    for start in 0..fg.users() {
        let mut dist = vec![usize::MAX; fg.users()];
        dist[start] = 0;
        let mut frontier = vec![start];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &j in &frontier {
                for &k in fg.user_neighbors(j) {
                    for &p in fg.resource_neighbors(k) {
                        if dist[p] == usize::MAX {
                            dist[p] = dist[j] + 1;
                            next.push(p);
                        }
                    }
                }
            }
            frontier = next;
        }
        worst = worst.max(dist.into_iter().filter(|&d| d != usize::MAX).max().unwrap_or(0));
    }
    worst
}

fn random_pmf<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    p
}

/// Probability-domain MPA on the chain codebook against exhaustive
/// marginals, after as many iterations as the graph's diameter.
pub fn tree_exactness(instances: usize, seed: u64) -> Result<CheckReport> {
    let cb = tree_codebook();
    let fg = cb.factor_graph();
    let iterations = user_diameter(&fg).max(1);
    let mut rng = seeded(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let n0 = rng.random_range(0.1..2.0);
        let ch = draw_channel(ChannelModel::Rayleigh, &fg, n0, &mut rng);
        let x: Vec<usize> = (0..3).map(|_| rng.random_range(0..4)).collect();
        let y = transmit(&cb, &fg, &x, &ch, &mut rng);
        let prior: Vec<Vec<f64>> = (0..3).map(|_| random_pmf(&mut rng, 4)).collect();
        let exact = exact_map_oracle(&cb, &fg, &y, &ch, Some(&prior))?;
        let mpa = detect_prob(&cb, &fg, &y, &ch, Some(&prior), iterations)?;
        for (a, b) in mpa.iter().flatten().zip(exact.marginals.iter().flatten()) {
            worst = worst.max((a - b).abs() / b);
        }
    }
    Ok(CheckReport {
        name: "tree marginals vs enumeration",
        cases: instances,
        worst,
        tolerance: 1e-9,
    })
}

/// Normalised log-domain posteriors against probability-domain MPA on the
/// default system, with random priors and `T` in {1, 2, 4}.
pub fn domain_equivalence(instances: usize, seed: u64) -> Result<CheckReport> {
    let cb = Codebook::default_scma();
    let fg = cb.factor_graph();
    let mut rng = seeded(seed);
    let mut worst: f64 = 0.0;
    for i in 0..instances {
        let t = [1, 2, 4][i % 3];
        let model = if i % 2 == 0 {
            ChannelModel::Awgn
        } else {
            ChannelModel::Rayleigh
        };
        let ch = draw_channel(model, &fg, rng.random_range(0.1..1.5), &mut rng);
        let x: Vec<usize> = (0..6).map(|_| rng.random_range(0..4)).collect();
        let y = transmit(&cb, &fg, &x, &ch, &mut rng);
        let llr: Vec<Vec<f64>> = (0..6)
            .map(|j| {
                (0..4)
                    .map(|m| {
                        if m == cb.reference(j) {
                            0.0
                        } else {
                            rng.random_range(-3.0..3.0)
                        }
                    })
                    .collect()
            })
            .collect();
        let pmf: Vec<Vec<f64>> = llr.iter().map(|l| softmax(l)).collect();
        let p = detect_prob(&cb, &fg, &y, &ch, Some(&pmf), t)?;
        let l = detect_log(&cb, &fg, &y, &ch, Some(&llr), t)?;
        for (j, pj) in p.iter().enumerate() {
            for (a, b) in l.posterior(j).iter().zip(pj) {
                worst = worst.max((a - b).abs() / b);
            }
        }
    }
    Ok(CheckReport {
        name: "log domain vs probability domain",
        cases: instances,
        worst,
        tolerance: 1e-6,
    })
}

/// Every resource-to-user message of one resource update against a direct
/// sum over the interfering users' symbols.
pub fn factor_enumeration(instances: usize, seed: u64) -> Result<CheckReport> {
    let cb = Codebook::default_scma();
    let fg = cb.factor_graph();
    let m = cb.size();
    let mut rng = seeded(seed);
    let mut mpa = LogMpa::new(&cb, &fg, LogSumMode::Jacobian);
    let mut store = mpa.new_store();
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let ch = draw_channel(ChannelModel::Rayleigh, &fg, rng.random_range(0.2..2.0), &mut rng);
        for e in 0..fg.num_edges() {
            for v in store.v_mut(e) {
                *v = rng.random_range(-3.0..3.0);
            }
        }
        let k = rng.random_range(0..fg.resources());
        let yk = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        mpa.update_resource(k, yk, &ch, &mut store);
        let edges = fg.resource_edges(k);
        for &e in edges {
            let j = fg.edges()[e].1;
            let others: Vec<usize> = edges.iter().copied().filter(|&f| f != e).collect();
            let direct = |xj: usize| -> f64 {
                let mut s = 0.0;
                for a in 0..m {
                    for b in 0..m {
                        let (ea, eb) = (others[0], others[1]);
                        let (ja, jb) = (fg.edges()[ea].1, fg.edges()[eb].1);
                        let r = yk
                            - ch.gain(e) * cb.entry(j, xj, k)
                            - ch.gain(ea) * cb.entry(ja, a, k)
                            - ch.gain(eb) * cb.entry(jb, b, k);
                        s += (-r.norm_sqr() / ch.n0 + store.v(ea)[a] + store.v(eb)[b]).exp();
                    }
                }
                s.ln()
            };
            let reference = direct(cb.reference(j));
            for xj in 0..m {
                worst = worst.max((store.u(e)[xj] - (direct(xj) - reference)).abs());
            }
        }
    }
    Ok(CheckReport {
        name: "resource messages vs 16-term enumeration",
        cases: instances,
        worst,
        tolerance: 1e-9,
    })
}

/// Symbol/bit conversions against probability-domain marginalisation, over
/// all 24 labelings of a 4-point codebook and `random` random LLR vectors.
/// The decomposition `total = intrinsic + prior` is checked for exact
/// equality (any mismatch makes `worst` infinite).
pub fn bridge_identities(random: usize, seed: u64) -> Result<CheckReport> {
    let base = Codebook::default_scma();
    let mut labelings = Vec::new();
    let patterns: Vec<Vec<u8>> = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
    permutations(&mut vec![0, 1, 2, 3], 0, &mut |p| {
        labelings.push(p.iter().map(|&i| patterns[i].clone()).collect::<Vec<_>>());
    });
    let mut rng = seeded(seed);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let p0 = |l: f64| 1.0 / (1.0 + (-l).exp());
    let p1 = |l: f64| 1.0 / (1.0 + l.exp());
    for (li, labels) in labelings.iter().enumerate() {
        let cw: Vec<Vec<Vec<Complex64>>> = vec![(0..4).map(|m| base.codeword(0, m).to_vec()).collect()];
        let cb = Codebook::new(4, cw, vec![labels.clone()])?;
        let n = if li == 0 { random.max(1) } else { (random / 24).max(1) };
        for _ in 0..n {
            cases += 1;
            let bit_prior = [rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0)];
            // bits -> symbols against the product pmf
            let sym = bits_to_symbol_llr(&bit_prior, &cb, 0);
            let pmf = |m: usize| -> f64 {
                (0..2)
                    .map(|i| {
                        if cb.label_bit(0, m, i) == 0 {
                            p0(bit_prior[i])
                        } else {
                            p1(bit_prior[i])
                        }
                    })
                    .product()
            };
            let r = cb.reference(0);
            for (m, s) in sym.iter().enumerate() {
                worst = worst.max((s - (pmf(m) / pmf(r)).ln()).abs());
            }
            // symbols -> bits against marginalised posteriors
            let mut intr = vec![0.0; 4];
            for (m, v) in intr.iter_mut().enumerate() {
                if m != r {
                    *v = rng.random_range(-8.0..8.0);
                }
            }
            let det = SymbolLlr::from_parts(1, 4, intr.clone(), sym.clone());
            let bits = symbol_to_bit_llr(&det, &cb, 0);
            let post = softmax(det.total(0));
            for i in 0..2 {
                let q = |b: u8| -> f64 { (0..4).filter(|&m| cb.label_bit(0, m, i) == b).map(|m| post[m]).sum() };
                worst = worst.max((bits.total[i] - (q(0) / q(1)).ln()).abs());
                worst = worst.max((bits.prior[i] - bit_prior[i]).abs());
                if bits.total[i] != bits.intrinsic[i] + bits.prior[i] {
                    worst = f64::INFINITY;
                }
            }
            for m in 0..4 {
                if det.total(0)[m] != det.intrinsic(0)[m] + det.prior(0)[m] {
                    worst = f64::INFINITY;
                }
            }
        }
    }
    Ok(CheckReport {
        name: "bit/symbol LLR conversions",
        cases,
        worst,
        tolerance: 1e-9,
    })
}

fn permutations(v: &mut Vec<usize>, at: usize, out: &mut impl FnMut(&[usize])) {
    if at == v.len() {
        out(v);
        return;
    }
    for i in at..v.len() {
        v.swap(at, i);
        permutations(v, at + 1, out);
        v.swap(at, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_is_a_tree_of_diameter_two() {
        let fg = tree_codebook().factor_graph();
        assert!(fg.is_forest());
        assert_eq!(user_diameter(&fg), 2);
        assert_eq!(user_diameter(&Codebook::default_scma().factor_graph()), 2);
    }

    #[test]
    fn quick_runs_pass() {
        for r in [
            tree_exactness(5, 1).unwrap(),
            domain_equivalence(6, 2).unwrap(),
            factor_enumeration(5, 3).unwrap(),
            bridge_identities(48, 4).unwrap(),
        ] {
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn all_labelings_enumerated() {
        let mut n = 0;
        permutations(&mut vec![0, 1, 2, 3], 0, &mut |_| n += 1);
        assert_eq!(n, 24);
    }
}
