//! Message passing multiuser detection on the SCMA factor graph.
//!
//! Two implementations of the same flooding schedule are provided:
//!
//! * [`detect_prob`] works on probabilities. Every user-to-resource message is
//!   the prior times the incoming resource messages from the other
//!   resources; every resource-to-user message sums the Gaussian kernel
//!   `exp(-|y_k - sum h x|^2 / N0)` over all symbol combinations of the other
//!   users on that resource.
//! * [`LogMpa`] (and the [`detect_log`] wrapper) does the same with LLRs
//!   relative to each user's reference symbol, reducing sums with the
//!   Jacobian logarithm, and splits its output into intrinsic and prior
//!   parts.
//!
//! [`exact_map_oracle`] enumerates every joint hypothesis and is only meant
//! for testing and small reference runs.

use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::codebook::{Codebook, FactorGraph};
use crate::error::{Error, Result};
use crate::logsum::{logsumexp_counted, LogSumMode};
use crate::ops::OpCounters;

/// Largest joint hypothesis count [`exact_map_oracle`] accepts.
pub const ORACLE_LIMIT: u128 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Prob,
    Log,
}

/// Per-edge message tables, `M` entries per edge and direction.
#[derive(Clone, Debug, PartialEq)]
pub struct MessageStore {
    domain: Domain,
    size: usize,
    /// user -> resource
    v: Vec<f64>,
    /// resource -> user
    u: Vec<f64>,
}

impl MessageStore {
    /// Neutral messages: `U = 1` / `LU = 0`, and uniform `V`.
    pub fn neutral(fg: &FactorGraph, size: usize, domain: Domain) -> Self {
        let n = fg.num_edges() * size;
        let (v, u) = match domain {
            Domain::Prob => (vec![1.0 / size as f64; n], vec![1.0; n]),
            Domain::Log => (vec![0.0; n], vec![0.0; n]),
        };
        MessageStore { domain, size, v, u }
    }

    pub fn reset(&mut self) {
        let (v, u) = match self.domain {
            Domain::Prob => (1.0 / self.size as f64, 1.0),
            Domain::Log => (0.0, 0.0),
        };
        self.v.fill(v);
        self.u.fill(u);
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn v(&self, edge: usize) -> &[f64] {
        &self.v[edge * self.size..(edge + 1) * self.size]
    }

    pub fn u(&self, edge: usize) -> &[f64] {
        &self.u[edge * self.size..(edge + 1) * self.size]
    }

    pub fn v_mut(&mut self, edge: usize) -> &mut [f64] {
        &mut self.v[edge * self.size..(edge + 1) * self.size]
    }

    pub fn u_mut(&mut self, edge: usize) -> &mut [f64] {
        &mut self.u[edge * self.size..(edge + 1) * self.size]
    }
}

/// Symbol LLRs per user, relative to the reference symbol, kept as
/// `total = intrinsic + prior`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolLlr {
    users: usize,
    size: usize,
    total: Vec<f64>,
    intrinsic: Vec<f64>,
    prior: Vec<f64>,
}

impl SymbolLlr {
    /// Output with no evidence beyond the prior (flat `J * M` layout).
    pub fn from_prior(users: usize, size: usize, prior: Vec<f64>) -> Self {
        assert_eq!(prior.len(), users * size);
        SymbolLlr {
            users,
            size,
            total: prior.clone(),
            intrinsic: vec![0.0; users * size],
            prior,
        }
    }

    pub fn from_parts(users: usize, size: usize, intrinsic: Vec<f64>, prior: Vec<f64>) -> Self {
        assert_eq!(intrinsic.len(), users * size);
        assert_eq!(prior.len(), users * size);
        let total = intrinsic.iter().zip(&prior).map(|(a, b)| a + b).collect();
        SymbolLlr {
            users,
            size,
            total,
            intrinsic,
            prior,
        }
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn total(&self, j: usize) -> &[f64] {
        &self.total[j * self.size..(j + 1) * self.size]
    }

    pub fn intrinsic(&self, j: usize) -> &[f64] {
        &self.intrinsic[j * self.size..(j + 1) * self.size]
    }

    pub fn prior(&self, j: usize) -> &[f64] {
        &self.prior[j * self.size..(j + 1) * self.size]
    }

    /// Normalised posterior pmf of user `j`.
    pub fn posterior(&self, j: usize) -> Vec<f64> {
        softmax(self.total(j))
    }

    /// Most likely symbol per user.
    pub fn decisions(&self) -> Vec<usize> {
        (0..self.users).map(|j| argmax(self.total(j))).collect()
    }
}

pub(crate) fn softmax(llr: &[f64]) -> Vec<f64> {
    let m = llr.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = llr.iter().map(|&v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn check_inputs(cb: &Codebook, fg: &FactorGraph, y: &[Complex64], ch: &ChannelRealization) -> Result<()> {
    if fg.users() != cb.users() || fg.resources() != cb.resources() {
        return Err(Error::Dimension(format!(
            "factor graph is {}x{}, codebook is {}x{}",
            fg.resources(),
            fg.users(),
            cb.resources(),
            cb.users()
        )));
    }
    if y.len() != cb.resources() {
        return Err(Error::Dimension(format!(
            "received {} samples, expected K = {}",
            y.len(),
            cb.resources()
        )));
    }
    if ch.gains.len() != fg.num_edges() {
        return Err(Error::Dimension(format!(
            "{} gains for {} edges",
            ch.gains.len(),
            fg.num_edges()
        )));
    }
    if !(ch.n0 > 0.0) {
        return Err(Error::Invalid(format!("noise density must be positive, got {}", ch.n0)));
    }
    Ok(())
}

/// Mixed-radix counter over the symbols of several users.
struct Odometer {
    digits: Vec<usize>,
    radix: usize,
}

impl Odometer {
    fn new(len: usize, radix: usize) -> Self {
        Odometer {
            digits: vec![0; len],
            radix,
        }
    }

    /// Advances; returns false after wrapping around to all zeros.
    fn step(&mut self) -> bool {
        for d in self.digits.iter_mut().rev() {
            *d += 1;
            if *d < self.radix {
                return true;
            }
            *d = 0;
        }
        false
    }
}

/// Probability-domain message passing.
///
/// `prior[j]` is the symbol pmf of user `j` (uniform when `None`). Returns the
/// normalised scores `p(x_j) * prod_{k in dj} U_{k->j}(x_j)` per user after
/// `iterations` flooding rounds.
pub fn detect_prob(
    cb: &Codebook,
    fg: &FactorGraph,
    y: &[Complex64],
    ch: &ChannelRealization,
    prior: Option<&[Vec<f64>]>,
    iterations: usize,
) -> Result<Vec<Vec<f64>>> {
    check_inputs(cb, fg, y, ch)?;
    if iterations < 1 {
        return Err(Error::Invalid("at least one detector iteration is required".into()));
    }
    let m = cb.size();
    let uniform = vec![vec![1.0 / m as f64; m]; cb.users()];
    let prior = prior.unwrap_or(&uniform);
    if prior.len() != cb.users() || prior.iter().any(|p| p.len() != m) {
        return Err(Error::Dimension("prior must hold M probabilities per user".into()));
    }

    let mut store = MessageStore::neutral(fg, m, Domain::Prob);
    let mut next_u = store.u.clone();
    for _ in 0..iterations {
        // user -> resource from the previous round's resource messages
        for j in 0..fg.users() {
            let edges = fg.user_edges(j);
            for &e in edges {
                let mut v = prior[j].clone();
                for &s in edges.iter().filter(|&&s| s != e) {
                    for (vx, ux) in v.iter_mut().zip(store.u(s)) {
                        *vx *= ux;
                    }
                }
                normalize(&mut v);
                store.v_mut(e).copy_from_slice(&v);
            }
        }
        // resource -> user from this round's user messages
        for k in 0..fg.resources() {
            let edges = fg.resource_edges(k);
            let d = edges.len();
            for (i, &e) in edges.iter().enumerate() {
                let j = fg.edges()[e].1;
                let others: Vec<usize> = (0..d).filter(|&l| l != i).collect();
                let out = &mut next_u[e * m..(e + 1) * m];
                for (xj, slot) in out.iter_mut().enumerate() {
                    let base = y[k] - ch.gain(e) * cb.entry(j, xj, k);
                    let mut acc = 0.0;
                    let mut odo = Odometer::new(others.len(), m);
                    loop {
                        let mut r = base;
                        let mut w = 1.0;
                        for (&l, &xp) in others.iter().zip(&odo.digits) {
                            let ep = edges[l];
                            r -= ch.gain(ep) * cb.entry(fg.edges()[ep].1, xp, k);
                            w *= store.v(ep)[xp];
                        }
                        acc += (-r.norm_sqr() / ch.n0).exp() * w;
                        if !odo.step() {
                            break;
                        }
                    }
                    *slot = acc;
                }
                normalize(out);
            }
        }
        std::mem::swap(&mut store.u, &mut next_u);
    }

    Ok((0..fg.users())
        .map(|j| {
            let mut v = prior[j].clone();
            for &e in fg.user_edges(j) {
                for (vx, ux) in v.iter_mut().zip(store.u(e)) {
                    *vx *= ux;
                }
            }
            normalize(&mut v);
            v
        })
        .collect())
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 && s.is_finite() {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

/// Log-domain detector with reusable buffers and operation counting.
pub struct LogMpa<'a> {
    cb: &'a Codebook,
    fg: &'a FactorGraph,
    mode: LogSumMode,
    ops: OpCounters,
    /// `h_kp * x_kp(m)` for the users of the resource being updated
    faded: Vec<Complex64>,
    terms: Vec<f64>,
    raw: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> LogMpa<'a> {
    pub fn new(cb: &'a Codebook, fg: &'a FactorGraph, mode: LogSumMode) -> Self {
        let max_dk = (0..fg.resources()).map(|k| fg.resource_degree(k)).max().unwrap_or(0);
        let m = cb.size();
        LogMpa {
            cb,
            fg,
            mode,
            ops: OpCounters::default(),
            faded: vec![Complex64::new(0.0, 0.0); max_dk * m],
            terms: Vec::with_capacity(m.pow(max_dk.saturating_sub(1) as u32)),
            raw: vec![0.0; m],
            scratch: vec![0.0; m],
        }
    }

    pub fn ops(&self) -> OpCounters {
        self.ops
    }

    pub fn take_ops(&mut self) -> OpCounters {
        std::mem::take(&mut self.ops)
    }

    pub fn new_store(&self) -> MessageStore {
        MessageStore::neutral(self.fg, self.cb.size(), Domain::Log)
    }

    /// Runs `iterations` flooding rounds starting from the resource messages
    /// already in `store`, then assembles the output.
    ///
    /// `prior` holds the symbol prior LLRs in `J * M` layout; its reference
    /// entries must be zero.
    pub fn run(
        &mut self,
        y: &[Complex64],
        ch: &ChannelRealization,
        prior: &[f64],
        iterations: usize,
        store: &mut MessageStore,
    ) -> Result<SymbolLlr> {
        check_inputs(self.cb, self.fg, y, ch)?;
        if iterations < 1 {
            return Err(Error::Invalid("at least one detector iteration is required".into()));
        }
        let m = self.cb.size();
        if prior.len() != self.cb.users() * m {
            return Err(Error::Dimension(format!(
                "prior has {} entries, expected J*M",
                prior.len()
            )));
        }
        if store.domain != Domain::Log || store.u.len() != self.fg.num_edges() * m {
            return Err(Error::Dimension("message store does not match this detector".into()));
        }
        for _ in 0..iterations {
            self.update_users(prior, store);
            for k in 0..self.fg.resources() {
                self.update_resource(k, y[k], ch, store);
            }
        }
        Ok(self.output(prior, store))
    }

    /// `LV_{j->k} = L^p(x_j) + sum_{s in dj \ k} LU_{s->j}`, for every edge.
    pub fn update_users(&mut self, prior: &[f64], store: &mut MessageStore) {
        let m = self.cb.size();
        let fg = self.fg;
        for j in 0..fg.users() {
            let edges = fg.user_edges(j);
            let p = &prior[j * m..(j + 1) * m];
            for &e in edges {
                let v = &mut self.scratch[..m];
                v.copy_from_slice(p);
                for &s in edges.iter().filter(|&&s| s != e) {
                    for (vx, ux) in v.iter_mut().zip(store.u(s)) {
                        *vx += ux;
                    }
                }
                store.v_mut(e).copy_from_slice(v);
            }
        }
    }

    /// Resource-to-user messages of resource `k` from the current
    /// user-to-resource messages:
    ///
    /// `LU_{k->j}(x) = lse_{x_p} [f_k(x, x_p) + sum_p LV_{p->k}(x_p)] - (same at the reference)`
    /// with `f_k = -|y_k - h_kj x_kj - sum_p h_kp x_kp|^2 / N0`.
    pub fn update_resource(&mut self, k: usize, yk: Complex64, ch: &ChannelRealization, store: &mut MessageStore) {
        let m = self.cb.size();
        let fg = self.fg;
        let cb = self.cb;
        let edges = fg.resource_edges(k);
        let d = edges.len();

        for (i, &e) in edges.iter().enumerate() {
            let j = fg.edges()[e].1;
            let h = ch.gain(e);
            for xm in 0..m {
                self.faded[i * m + xm] = h * cb.entry(j, xm, k);
            }
        }
        self.ops.mul += (4 * d * m) as u64;

        let mut digits = [0usize; 16];
        let mut others = [0usize; 16];
        assert!(d <= 16, "resource degree above 16 is unsupported");
        for (i, &e) in edges.iter().enumerate() {
            let j = fg.edges()[e].1;
            let mut n_others = 0;
            for l in (0..d).filter(|&l| l != i) {
                others[n_others] = l;
                n_others += 1;
            }
            let others = &others[..n_others];
            for xj in 0..m {
                self.terms.clear();
                let base = yk - self.faded[i * m + xj];
                let digits = &mut digits[..n_others];
                digits.fill(0);
                loop {
                    let mut r = base;
                    let mut lv = 0.0;
                    for (&l, &xp) in others.iter().zip(digits.iter()) {
                        r -= self.faded[l * m + xp];
                        lv += store.v[edges[l] * m + xp];
                    }
                    let metric = -(r.re * r.re + r.im * r.im) / ch.n0;
                    self.terms.push(metric + lv);
                    // advance the odometer over the other users' symbols
                    let mut pos = n_others;
                    let wrapped = loop {
                        if pos == 0 {
                            break true;
                        }
                        pos -= 1;
                        digits[pos] += 1;
                        if digits[pos] < m {
                            break false;
                        }
                        digits[pos] = 0;
                    };
                    if wrapped {
                        break;
                    }
                }
                let n = self.terms.len() as u64;
                self.ops.mul += 2 * n;
                self.ops.div += n;
                self.raw[xj] = logsumexp_counted(&self.terms, self.mode, &mut self.ops);
            }
            let reference = self.raw[cb.reference(j)];
            for (out, &r) in store.u_mut(e).iter_mut().zip(&self.raw) {
                *out = r - reference;
            }
        }
    }

    /// `total = L^p + sum_{k in dj} LU_{k->j}`, with the sum kept as the
    /// intrinsic part.
    pub fn output(&self, prior: &[f64], store: &MessageStore) -> SymbolLlr {
        let m = self.cb.size();
        let users = self.cb.users();
        let mut intrinsic = vec![0.0; users * m];
        for j in 0..users {
            for &e in self.fg.user_edges(j) {
                for (acc, u) in intrinsic[j * m..(j + 1) * m].iter_mut().zip(store.u(e)) {
                    *acc += u;
                }
            }
        }
        SymbolLlr::from_parts(users, m, intrinsic, prior.to_vec())
    }
}

/// Log-domain detection from neutral messages.
///
/// `prior[j]` holds the symbol prior LLRs of user `j` (zero when `None`).
pub fn detect_log(
    cb: &Codebook,
    fg: &FactorGraph,
    y: &[Complex64],
    ch: &ChannelRealization,
    prior: Option<&[Vec<f64>]>,
    iterations: usize,
) -> Result<SymbolLlr> {
    let m = cb.size();
    let flat: Vec<f64> = match prior {
        None => vec![0.0; cb.users() * m],
        Some(p) => {
            if p.len() != cb.users() || p.iter().any(|v| v.len() != m) {
                return Err(Error::Dimension("prior must hold M LLRs per user".into()));
            }
            for (j, v) in p.iter().enumerate() {
                if v[cb.reference(j)] != 0.0 {
                    return Err(Error::Invalid(format!(
                        "prior of user {j} is nonzero at the reference symbol"
                    )));
                }
            }
            p.concat()
        }
    };
    let mut mpa = LogMpa::new(cb, fg, LogSumMode::Jacobian);
    let mut store = mpa.new_store();
    mpa.run(y, ch, &flat, iterations, &mut store)
}

/// Exact per-user marginals and joint MAP decision by enumeration.
#[derive(Clone, Debug, PartialEq)]
pub struct MapOracle {
    /// Normalised marginal pmf per user.
    pub marginals: Vec<Vec<f64>>,
    /// Symbol indices maximising the joint posterior.
    pub joint_map: Vec<usize>,
    /// Per-user argmax of the marginals.
    pub marginal_map: Vec<usize>,
    /// Number of joint hypotheses enumerated.
    pub hypotheses: usize,
}

/// Sums `prod_j p(x_j) prod_k exp(-|y_k - sum h x|^2 / N0)` over all `M^J`
/// joint hypotheses.
pub fn exact_map_oracle(
    cb: &Codebook,
    fg: &FactorGraph,
    y: &[Complex64],
    ch: &ChannelRealization,
    prior: Option<&[Vec<f64>]>,
) -> Result<MapOracle> {
    check_inputs(cb, fg, y, ch)?;
    let m = cb.size();
    let users = cb.users();
    let count = (m as u128).checked_pow(users as u32).unwrap_or(u128::MAX);
    if count > ORACLE_LIMIT {
        return Err(Error::TooLarge(count));
    }
    let log_prior: Vec<Vec<f64>> = match prior {
        None => vec![vec![-(m as f64).ln(); m]; users],
        Some(p) => {
            if p.len() != users || p.iter().any(|v| v.len() != m) {
                return Err(Error::Dimension("prior must hold M probabilities per user".into()));
            }
            p.iter().map(|v| v.iter().map(|x| x.ln()).collect()).collect()
        }
    };

    let mut scores = Vec::with_capacity(count as usize);
    let mut odo = Odometer::new(users, m);
    loop {
        let x = &odo.digits;
        let mut s: f64 = (0..users).map(|j| log_prior[j][x[j]]).sum();
        for k in 0..fg.resources() {
            let mut r = y[k];
            for &e in fg.resource_edges(k) {
                let j = fg.edges()[e].1;
                r -= ch.gain(e) * cb.entry(j, x[j], k);
            }
            s -= r.norm_sqr() / ch.n0;
        }
        scores.push(s);
        if !odo.step() {
            break;
        }
    }

    let best = argmax(&scores);
    let peak = scores[best];
    let mut marginals = vec![vec![0.0; m]; users];
    let mut odo = Odometer::new(users, m);
    for &s in &scores {
        let w = (s - peak).exp();
        for (j, &xj) in odo.digits.iter().enumerate() {
            marginals[j][xj] += w;
        }
        odo.step();
    }
    for v in &mut marginals {
        normalize(v);
    }
    let joint_map = (0..users).map(|j| (best / m.pow((users - 1 - j) as u32)) % m).collect();
    let marginal_map = marginals.iter().map(|v| argmax(v)).collect();
    Ok(MapOracle {
        marginals,
        joint_map,
        marginal_map,
        hypotheses: scores.len(),
    })
}
