//! SCMA codebooks and the user/resource factor graph they induce.
//!
//! # File format
//!
//! Codebooks are stored as TOML. Unknown keys are rejected.
//!
//! ```toml
//! J = 6          # users
//! K = 4          # resources
//! M = 4          # codewords per user, a power of two
//! N = 2          # optional: nonzero entries per codeword, same for every user
//!
//! [[user]]       # repeated J times
//! support = [1, 2]                      # 1-based resource indices
//! codewords = [                         # M rows of K complex (re, im) pairs
//!   [[-0.94, 0.0], [-0.15, 0.27], [0.0, 0.0], [0.0, 0.0]],
//!   # ...
//! ]
//! labels = [[0, 0], [0, 1], [1, 0], [1, 1]]   # M rows of log2(M) bits
//! ```
//!
//! Every codeword of a user must be nonzero exactly on that user's support,
//! labels must form a bijection onto all bit patterns, and the mean codeword
//! energy of each user must be 1.

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};

/// Entries with magnitude at or below this are treated as structural zeros.
const ZERO_TOL: f64 = 1e-12;
/// Allowed deviation of the per-user mean codeword energy from 1.
pub const ENERGY_TOL: f64 = 1e-9;

const DEFAULT_CODEBOOK: &str = include_str!("../data/scma_j6_k4_m4.toml");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodebookFile {
    #[serde(rename = "J")]
    users: usize,
    #[serde(rename = "K")]
    resources: usize,
    #[serde(rename = "M")]
    size: usize,
    #[serde(rename = "N", default)]
    nonzeros: Option<usize>,
    user: Vec<UserEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct UserEntry {
    support: Vec<usize>,
    codewords: Vec<Vec<[f64; 2]>>,
    labels: Vec<Vec<u8>>,
}

/// Per-user sparse codebooks with their bit labelling.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    users: usize,
    resources: usize,
    size: usize,
    bits: usize,
    /// `[j][m][k]`, flattened.
    codewords: Vec<Complex64>,
    /// `[j][m]`: label of codeword `m` packed MSB-first (bit 0 is the MSB).
    labels: Vec<usize>,
    /// `[j][label]`: codeword index carrying that label.
    by_label: Vec<usize>,
    /// 0-based, ascending.
    supports: Vec<Vec<usize>>,
}

impl Codebook {
    /// Builds a codebook, enforcing every structural invariant.
    ///
    /// `codewords[j][m]` is a length-`K` vector; `labels[j][m]` is a
    /// length-`log2(M)` bit pattern.
    pub fn new(resources: usize, codewords: Vec<Vec<Vec<Complex64>>>, labels: Vec<Vec<Vec<u8>>>) -> Result<Self> {
        let bad = |msg: String| Err(Error::Codebook(msg));
        let users = codewords.len();
        if users == 0 {
            return bad("at least one user is required".into());
        }
        if resources == 0 {
            return bad("at least one resource is required".into());
        }
        let size = codewords[0].len();
        if size < 2 || !size.is_power_of_two() {
            return bad(format!("codebook size M = {size} is not a power of two >= 2"));
        }
        let bits = size.trailing_zeros() as usize;
        if labels.len() != users {
            return bad(format!("{} label tables for {users} users", labels.len()));
        }

        let mut flat = Vec::with_capacity(users * size * resources);
        let mut packed = Vec::with_capacity(users * size);
        let mut by_label = vec![usize::MAX; users * size];
        let mut supports = Vec::with_capacity(users);

        for (j, (words, labs)) in codewords.iter().zip(&labels).enumerate() {
            if words.len() != size {
                return bad(format!("user {}: {} codewords, expected {size}", j + 1, words.len()));
            }
            let mut support: Option<Vec<usize>> = None;
            let mut energy = 0.0;
            for (m, w) in words.iter().enumerate() {
                if w.len() != resources {
                    return bad(format!(
                        "user {} codeword {m}: {} entries, expected K = {resources}",
                        j + 1,
                        w.len()
                    ));
                }
                if w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return bad(format!("user {} codeword {m}: non-finite entry", j + 1));
                }
                let s: Vec<usize> = (0..resources).filter(|&k| w[k].norm() > ZERO_TOL).collect();
                match &support {
                    None => support = Some(s),
                    Some(prev) if *prev != s => {
                        return bad(format!(
                            "user {} codeword {m}: support {:?} differs from {:?}",
                            j + 1,
                            one_based(&s),
                            one_based(prev)
                        ));
                    }
                    _ => {}
                }
                energy += w.iter().map(|z| z.norm_sqr()).sum::<f64>();
                flat.extend(w.iter().map(|&z| {
                    if z.norm() > ZERO_TOL {
                        z
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                }));
            }
            let support = support.unwrap_or_default();
            if support.is_empty() {
                return bad(format!("user {} has an all-zero codebook", j + 1));
            }
            let mean = energy / size as f64;
            if (mean - 1.0).abs() > ENERGY_TOL {
                return bad(format!("user {}: mean codeword energy {mean} is not 1", j + 1));
            }

            if labs.len() != size {
                return bad(format!("user {}: {} labels, expected {size}", j + 1, labs.len()));
            }
            for (m, lab) in labs.iter().enumerate() {
                if lab.len() != bits {
                    return bad(format!("user {} label {m}: {} bits, expected {bits}", j + 1, lab.len()));
                }
                let mut v = 0usize;
                for &b in lab {
                    if b > 1 {
                        return bad(format!("user {} label {m}: bit value {b}", j + 1));
                    }
                    v = (v << 1) | b as usize;
                }
                let slot = &mut by_label[j * size + v];
                if *slot != usize::MAX {
                    return bad(format!("user {}: label {lab:?} used twice", j + 1));
                }
                *slot = m;
                packed.push(v);
            }
            supports.push(support);
        }

        Ok(Codebook {
            users,
            resources,
            size,
            bits,
            codewords: flat,
            labels: packed,
            by_label,
            supports,
        })
    }

    /// Parses and validates a codebook file.
    pub fn from_toml_str(source: &str) -> Result<Self> {
        let file: CodebookFile = toml::from_str(source)?;
        if file.user.len() != file.users {
            return Err(Error::Codebook(format!(
                "J = {} but {} [[user]] tables",
                file.users,
                file.user.len()
            )));
        }
        let mut codewords = Vec::with_capacity(file.users);
        let mut labels = Vec::with_capacity(file.users);
        for (j, u) in file.user.into_iter().enumerate() {
            if u.codewords.len() != file.size {
                return Err(Error::Codebook(format!(
                    "user {}: {} codewords but M = {}",
                    j + 1,
                    u.codewords.len(),
                    file.size
                )));
            }
            let mut declared = u.support.clone();
            declared.sort_unstable();
            declared.dedup();
            if declared.len() != u.support.len() || declared.iter().any(|&k| k == 0 || k > file.resources) {
                return Err(Error::Codebook(format!(
                    "user {}: support {:?} is not a set of indices in 1..={}",
                    j + 1,
                    u.support,
                    file.resources
                )));
            }
            if let Some(n) = file.nonzeros {
                if declared.len() != n {
                    return Err(Error::Codebook(format!(
                        "user {}: support has {} entries but N = {n}",
                        j + 1,
                        declared.len()
                    )));
                }
            }
            let words: Vec<Vec<Complex64>> = u
                .codewords
                .iter()
                .map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
                .collect();
            // the declared support must agree with the nonzero pattern
            for (m, w) in words.iter().enumerate() {
                let actual: Vec<usize> = (0..w.len())
                    .filter(|&k| w[k].norm() > ZERO_TOL)
                    .map(|k| k + 1)
                    .collect();
                if actual != declared {
                    return Err(Error::Codebook(format!(
                        "user {} codeword {m}: nonzero entries {actual:?} do not match support {declared:?}",
                        j + 1
                    )));
                }
            }
            codewords.push(words);
            labels.push(u.labels);
        }
        let cb = Codebook::new(file.resources, codewords, labels)?;
        if cb.size != file.size {
            return Err(Error::Codebook(format!(
                "M = {} but codebooks have {} entries",
                file.size, cb.size
            )));
        }
        Ok(cb)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// The bundled 6-user, 4-resource, M = 4 codebook.
    pub fn default_scma() -> Self {
        Self::from_toml_str(DEFAULT_CODEBOOK).expect("bundled codebook is valid")
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn resources(&self) -> usize {
        self.resources
    }

    /// Codebook size M.
    pub fn size(&self) -> usize {
        self.size
    }

    /// log2(M).
    pub fn bits_per_symbol(&self) -> usize {
        self.bits
    }

    /// 0-based resources occupied by user `j`.
    pub fn support(&self, j: usize) -> &[usize] {
        &self.supports[j]
    }

    /// Full K-dimensional codeword `m` of user `j`.
    pub fn codeword(&self, j: usize, m: usize) -> &[Complex64] {
        let start = (j * self.size + m) * self.resources;
        &self.codewords[start..start + self.resources]
    }

    #[inline]
    pub fn entry(&self, j: usize, m: usize, k: usize) -> Complex64 {
        self.codewords[(j * self.size + m) * self.resources + k]
    }

    /// Packed label of codeword `m` (first bit is the MSB).
    #[inline]
    pub fn label(&self, j: usize, m: usize) -> usize {
        self.labels[j * self.size + m]
    }

    /// Bit `i` (0 = first) of the label of codeword `m`.
    #[inline]
    pub fn label_bit(&self, j: usize, m: usize, i: usize) -> u8 {
        ((self.label(j, m) >> (self.bits - 1 - i)) & 1) as u8
    }

    pub fn label_bits(&self, j: usize, m: usize) -> Vec<u8> {
        (0..self.bits).map(|i| self.label_bit(j, m, i)).collect()
    }

    /// Codeword index carrying the given bit pattern.
    pub fn index_of_bits(&self, j: usize, bits: &[u8]) -> Result<usize> {
        if bits.len() != self.bits {
            return Err(Error::Dimension(format!(
                "{} bits given, symbol carries {}",
                bits.len(),
                self.bits
            )));
        }
        let mut v = 0usize;
        for &b in bits {
            if b > 1 {
                return Err(Error::Invalid(format!("bit value {b}")));
            }
            v = (v << 1) | b as usize;
        }
        Ok(self.by_label[j * self.size + v])
    }

    /// SCMA mapper: `log2(M)` bits to a K-dimensional codeword.
    pub fn map_bits(&self, j: usize, bits: &[u8]) -> Result<&[Complex64]> {
        if j >= self.users {
            return Err(Error::Invalid(format!("user {j} out of range")));
        }
        Ok(self.codeword(j, self.index_of_bits(j, bits)?))
    }

    /// Index of the reference codeword, the one labelled with all zeros.
    #[inline]
    pub fn reference(&self, j: usize) -> usize {
        self.by_label[j * self.size]
    }

    pub fn factor_graph(&self) -> FactorGraph {
        FactorGraph::from_supports(self.resources, &self.supports)
    }
}

fn one_based(s: &[usize]) -> Vec<usize> {
    s.iter().map(|k| k + 1).collect()
}

/// Bipartite graph between users (variable nodes) and resources (factor
/// nodes). Edges are numbered resource-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorGraph {
    users: usize,
    resources: usize,
    user_neighbors: Vec<Vec<usize>>,
    resource_neighbors: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    user_edges: Vec<Vec<usize>>,
    resource_edges: Vec<Vec<usize>>,
}

impl FactorGraph {
    pub fn from_supports(resources: usize, supports: &[Vec<usize>]) -> Self {
        let users = supports.len();
        let mut user_neighbors: Vec<Vec<usize>> = supports.to_vec();
        for s in &mut user_neighbors {
            s.sort_unstable();
        }
        let mut resource_neighbors = vec![Vec::new(); resources];
        for (j, s) in user_neighbors.iter().enumerate() {
            for &k in s {
                resource_neighbors[k].push(j);
            }
        }
        let mut edges = Vec::new();
        let mut resource_edges = vec![Vec::new(); resources];
        let mut user_edges = vec![Vec::new(); users];
        for (k, ns) in resource_neighbors.iter().enumerate() {
            for &j in ns {
                resource_edges[k].push(edges.len());
                edges.push((k, j));
            }
        }
        for (j, ns) in user_neighbors.iter().enumerate() {
            for &k in ns {
                let e = resource_edges[k]
                    .iter()
                    .copied()
                    .find(|&e| edges[e].1 == j)
                    .expect("edge exists");
                user_edges[j].push(e);
            }
        }
        FactorGraph {
            users,
            resources,
            user_neighbors,
            resource_neighbors,
            edges,
            user_edges,
            resource_edges,
        }
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn resources(&self) -> usize {
        self.resources
    }

    /// K x J indicator matrix: `c[k][j] = 1` iff user `j` occupies resource `k`.
    pub fn indicator(&self) -> Vec<Vec<u8>> {
        let mut c = vec![vec![0u8; self.users]; self.resources];
        for &(k, j) in &self.edges {
            c[k][j] = 1;
        }
        c
    }

    /// Resources of user `j`, ascending.
    pub fn user_neighbors(&self, j: usize) -> &[usize] {
        &self.user_neighbors[j]
    }

    /// Users on resource `k`, ascending.
    pub fn resource_neighbors(&self, k: usize) -> &[usize] {
        &self.resource_neighbors[k]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edge ids of user `j`, in the order of [`Self::user_neighbors`].
    pub fn user_edges(&self, j: usize) -> &[usize] {
        &self.user_edges[j]
    }

    /// Edge ids of resource `k`, in the order of [`Self::resource_neighbors`].
    pub fn resource_edges(&self, k: usize) -> &[usize] {
        &self.resource_edges[k]
    }

    pub fn user_degree(&self, j: usize) -> usize {
        self.user_neighbors[j].len()
    }

    pub fn resource_degree(&self, k: usize) -> usize {
        self.resource_neighbors[k].len()
    }

    /// `(d_j, d_k)` when every user and every resource has the same degree.
    pub fn regular_degrees(&self) -> Option<(usize, usize)> {
        let dj = self.user_degree(0);
        let dk = self.resource_degree(0);
        let regular = (0..self.users).all(|j| self.user_degree(j) == dj)
            && (0..self.resources).all(|k| self.resource_degree(k) == dk);
        regular.then_some((dj, dk))
    }

    /// True when the bipartite graph has no cycles.
    pub fn is_forest(&self) -> bool {
        // a forest has |E| = |V| - #components
        let n = self.users + self.resources;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(k, j) in &self.edges {
            let a = find(&mut parent, j);
            let b = find(&mut parent, self.users + k);
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BPSK: &str = r#"
J = 1
K = 1
M = 2
N = 1

[[user]]
support = [1]
codewords = [[[1.0, 0.0]], [[-1.0, 0.0]]]
labels = [[0], [1]]
"#;

    #[test]
    fn default_codebook_shape() {
        let cb = Codebook::default_scma();
        assert_eq!(
            (cb.users(), cb.resources(), cb.size(), cb.bits_per_symbol()),
            (6, 4, 4, 2)
        );
        let fg = cb.factor_graph();
        assert_eq!(fg.regular_degrees(), Some((2, 3)));
    }

    #[test]
    fn default_indicator_matrix() {
        let c = Codebook::default_scma().factor_graph().indicator();
        let expected = vec![
            vec![1, 1, 1, 0, 0, 0],
            vec![1, 0, 0, 1, 1, 0],
            vec![0, 1, 0, 1, 0, 1],
            vec![0, 0, 1, 0, 1, 1],
        ];
        assert_eq!(c, expected);
    }

    #[test]
    fn unit_energy_per_user() {
        let cb = Codebook::default_scma();
        for j in 0..cb.users() {
            let e: f64 = (0..cb.size())
                .map(|m| cb.codeword(j, m).iter().map(|z| z.norm_sqr()).sum::<f64>())
                .sum();
            assert!((e / cb.size() as f64 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_bpsk() {
        let cb = Codebook::from_toml_str(BPSK).unwrap();
        assert_eq!((cb.users(), cb.resources(), cb.size()), (1, 1, 2));
        assert_eq!(cb.factor_graph().indicator(), vec![vec![1]]);
        assert_eq!(cb.map_bits(0, &[1]).unwrap()[0], Complex64::new(-1.0, 0.0));
        assert_eq!(cb.reference(0), 0);
    }

    #[test]
    fn inconsistent_support_rejected() {
        // user 2's last codeword moves its second entry from resource 2 to 3
        let src = r#"
J = 2
K = 3
M = 4

[[user]]
support = [1]
codewords = [[[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]], [[-1.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
             [[0.0, 1.0], [0.0, 0.0], [0.0, 0.0]], [[0.0, -1.0], [0.0, 0.0], [0.0, 0.0]]]
labels = [[0, 0], [0, 1], [1, 0], [1, 1]]

[[user]]
support = [1, 2]
codewords = [[[0.5, 0.0], [0.5, 0.0], [0.0, 0.0]], [[-0.5, 0.0], [0.5, 0.0], [0.0, 0.0]],
             [[0.5, 0.0], [-0.5, 0.0], [0.0, 0.0]], [[-0.5, 0.0], [0.0, 0.0], [0.5, 0.0]]]
labels = [[0, 0], [0, 1], [1, 0], [1, 1]]
"#;
        let err = Codebook::from_toml_str(src).unwrap_err();
        assert!(matches!(err, Error::Codebook(_)), "{err}");
    }

    #[test]
    fn rejects_non_power_of_two_and_bad_energy() {
        let three = BPSK
            .replace("M = 2", "M = 3")
            .replace("[[-1.0, 0.0]]]", "[[-1.0, 0.0]], [[0.0, 1.0]]]")
            .replace("labels = [[0], [1]]", "labels = [[0], [1], [1]]");
        assert!(Codebook::from_toml_str(&three).is_err());
        let hot = BPSK.replace("[[1.0, 0.0]], [[-1.0, 0.0]]", "[[2.0, 0.0]], [[-1.0, 0.0]]");
        assert!(Codebook::from_toml_str(&hot).is_err());
    }

    #[test]
    fn rejects_unknown_fields_and_duplicate_labels() {
        assert!(Codebook::from_toml_str(&format!("{BPSK}\nextra = 1\n")).is_err());
        let dup = BPSK.replace("labels = [[0], [1]]", "labels = [[0], [0]]");
        assert!(Codebook::from_toml_str(&dup).is_err());
    }

    #[test]
    fn support_column_by_construction() {
        let s = vec![vec![0], vec![0, 2], vec![1]];
        let fg = FactorGraph::from_supports(4, &s);
        let c = fg.indicator();
        let col: Vec<u8> = (0..4).map(|k| c[k][1]).collect();
        assert_eq!(col, vec![1, 0, 1, 0]);
        for j in 0..3 {
            for (&k, &e) in fg.user_neighbors(j).iter().zip(fg.user_edges(j)) {
                assert_eq!(fg.edges()[e], (k, j));
            }
        }
    }

    #[test]
    fn map_bits_is_a_bijection() {
        let cb = Codebook::default_scma();
        for j in 0..cb.users() {
            let mut seen = Vec::new();
            for v in 0..cb.size() {
                let bits: Vec<u8> = (0..cb.bits_per_symbol())
                    .map(|i| ((v >> (cb.bits_per_symbol() - 1 - i)) & 1) as u8)
                    .collect();
                let m = cb.index_of_bits(j, &bits).unwrap();
                assert_eq!(cb.label_bits(j, m), bits);
                assert_eq!(cb.map_bits(j, &bits).unwrap(), cb.codeword(j, m));
                assert!(!seen.contains(&m));
                seen.push(m);
            }
        }
        assert!(cb.map_bits(0, &[0]).is_err());
    }

    #[test]
    fn cycle_detection() {
        assert!(!Codebook::default_scma().factor_graph().is_forest());
        assert!(FactorGraph::from_supports(2, &[vec![0], vec![0, 1], vec![1]]).is_forest());
    }
}
