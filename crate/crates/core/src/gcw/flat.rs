//! Explicit G-CW complexes: every cell listed, the group acting by signed
//! permutations of cells. Used to build products, inductions `G ×_H X`,
//! and disc/sphere pairs of representations, then folded into orbit form.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gcw::{BoundaryRecord, CellOrbit, GCWComplex};
use crate::groups::{FiniteGroup, Subgroup};

type Chain = Vec<(usize, i64)>;

#[derive(Clone, Debug)]
pub struct FlatComplex {
    group: FiniteGroup,
    dims: Vec<usize>,
    labels: Vec<String>,
    boundary: Vec<Chain>,
    /// `action[g][c] = (c', s)` means `g·c = s·c'`.
    action: Vec<Vec<(usize, i64)>>,
    sub: Vec<bool>,
}

fn normalize(mut chain: Chain) -> Chain {
    chain.sort_unstable();
    let mut out: Chain = Vec::with_capacity(chain.len());
    for (c, m) in chain {
        match out.last_mut() {
            Some((last, acc)) if *last == c => *acc += m,
            _ => out.push((c, m)),
        }
    }
    out.retain(|&(_, m)| m != 0);
    out
}

impl FlatComplex {
    pub fn new(
        group: FiniteGroup,
        dims: Vec<usize>,
        labels: Vec<String>,
        boundary: Vec<Chain>,
        action: Vec<Vec<(usize, i64)>>,
        sub: Vec<bool>,
    ) -> Result<Self> {
        let n = dims.len();
        if labels.len() != n || boundary.len() != n || sub.len() != n || action.len() != group.order() {
            return Err(Error::Shape("flat complex tables have inconsistent lengths".into()));
        }
        if action.iter().any(|row| row.len() != n || row.iter().any(|&(c, s)| c >= n || s.abs() != 1)) {
            return Err(Error::InvalidAction("action must be a signed permutation of cells".into()));
        }
        let x = Self { group, dims, labels, boundary: boundary.into_iter().map(normalize).collect(), action, sub };
        x.validate()?;
        Ok(x)
    }

    fn validate(&self) -> Result<()> {
        let n = self.dims.len();
        for c in 0..n {
            for &(f, _) in &self.boundary[c] {
                if f >= n || self.dims[f] + 1 != self.dims[c] {
                    return Err(Error::Fixture(format!("bad face {f} of cell {}", self.labels[c])));
                }
                if self.sub[c] && !self.sub[f] {
                    return Err(Error::Fixture(format!("subcomplex not closed at {}", self.labels[c])));
                }
            }
            let dd = normalize(
                self.boundary[c]
                    .iter()
                    .flat_map(|&(f, m)| self.boundary[f].iter().map(move |&(ff, mm)| (ff, m * mm)))
                    .collect(),
            );
            if !dd.is_empty() {
                return Err(Error::BoundaryNotNilpotent { degree: self.dims[c] as i64 });
            }
        }
        let grp = &self.group;
        for c in 0..n {
            if self.action[grp.identity()][c] != (c, 1) {
                return Err(Error::InvalidAction("identity must act trivially".into()));
            }
        }
        for g in grp.elements() {
            for c in 0..n {
                let (img, s) = self.action[g][c];
                if img == c && s != 1 {
                    return Err(Error::InvalidAction(format!(
                        "element {g} reverses the cell {} it fixes",
                        self.labels[c]
                    )));
                }
                if self.sub[c] != self.sub[img] || self.dims[c] != self.dims[img] {
                    return Err(Error::InvalidAction("action does not preserve the cell structure".into()));
                }
                for h in grp.elements() {
                    let (mid, s1) = self.action[h][c];
                    let (end, s2) = self.action[g][mid];
                    if self.action[grp.mul(g, h)][c] != (end, s1 * s2) {
                        return Err(Error::InvalidAction(format!("not an action at ({g}, {h})")));
                    }
                }
                // g·∂c = ∂(g·c)
                let lhs = normalize(self.translate(g, &self.boundary[c]));
                let rhs = normalize(self.boundary[img].iter().map(|&(f, m)| (f, m * s)).collect());
                if lhs != rhs {
                    return Err(Error::InvalidAction(format!(
                        "element {g} does not commute with the boundary of {}",
                        self.labels[c]
                    )));
                }
            }
        }
        Ok(())
    }

    fn translate(&self, g: usize, chain: &Chain) -> Chain {
        chain
            .iter()
            .map(|&(f, m)| {
                let (img, s) = self.action[g][f];
                (img, m * s)
            })
            .collect()
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// A point with `S = ∅`, the disc pair of the zero representation.
    pub fn point(group: &FiniteGroup) -> Self {
        let action = vec![vec![(0, 1)]; group.order()];
        Self::new(group.clone(), vec![0], vec!["pt".into()], vec![vec![]], action, vec![false]).expect("point is valid")
    }

    /// `(D(ℝ), S(ℝ))` with the trivial action: cells `-1`, `+1`, `[-1,1]`.
    pub fn trivial_interval(group: &FiniteGroup) -> Self {
        let action = vec![vec![(0, 1), (1, 1), (2, 1)]; group.order()];
        Self::new(
            group.clone(),
            vec![0, 0, 1],
            vec!["-1".into(), "+1".into(), "[-1,1]".into()],
            vec![vec![], vec![], vec![(1, 1), (0, -1)]],
            action,
            vec![true, true, false],
        )
        .expect("interval is valid")
    }

    /// `(D(ℝ⁻), S(ℝ⁻))` where elements with `flips(g)` act by `-1`: cells
    /// `0`, `+1`, `-1`, `[0,1]`, `[0,-1]`.
    pub fn sign_interval(group: &FiniteGroup, flips: impl Fn(usize) -> bool) -> Self {
        let action = group
            .elements()
            .map(|g| {
                if flips(g) {
                    vec![(0, 1), (2, 1), (1, 1), (4, 1), (3, 1)]
                } else {
                    vec![(0, 1), (1, 1), (2, 1), (3, 1), (4, 1)]
                }
            })
            .collect();
        Self::new(
            group.clone(),
            vec![0, 0, 0, 1, 1],
            vec!["0".into(), "+1".into(), "-1".into(), "[0,1]".into(), "[0,-1]".into()],
            vec![vec![], vec![], vec![], vec![(1, 1), (0, -1)], vec![(2, 1), (0, -1)]],
            action,
            vec![false, true, true, false, false],
        )
        .expect("sign interval is valid")
    }

    /// `(D(ℝ²), S(ℝ²))` for a rotation action where `g` turns the plane by
    /// `shift(g)` steps of `2π/m`. Cells: centre, `m` vertices, `m` radii,
    /// `m` arcs, `m` sectors.
    pub fn rotation_disc(group: &FiniteGroup, m: usize, shift: impl Fn(usize) -> usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::UnsupportedRep(format!("rotation disc needs at least 2 vertices, got {m}")));
        }
        let v = |i: usize| 1 + i % m;
        let r = |i: usize| 1 + m + i % m;
        let a = |i: usize| 1 + 2 * m + i % m;
        let s = |i: usize| 1 + 3 * m + i % m;
        let total = 1 + 4 * m;
        let mut dims = vec![0; total];
        let mut labels = vec![String::new(); total];
        let mut boundary: Vec<Chain> = vec![Vec::new(); total];
        let mut sub = vec![false; total];
        labels[0] = "o".into();
        for i in 0..m {
            labels[v(i)] = format!("v{i}");
            sub[v(i)] = true;
            dims[r(i)] = 1;
            labels[r(i)] = format!("r{i}");
            boundary[r(i)] = vec![(v(i), 1), (0, -1)];
            dims[a(i)] = 1;
            labels[a(i)] = format!("a{i}");
            boundary[a(i)] = vec![(v(i + 1), 1), (v(i), -1)];
            sub[a(i)] = true;
            dims[s(i)] = 2;
            labels[s(i)] = format!("s{i}");
            boundary[s(i)] = vec![(r(i), 1), (a(i), 1), (r(i + 1), -1)];
        }
        let action = group
            .elements()
            .map(|g| {
                let t = shift(g) % m;
                (0..total)
                    .map(|c| {
                        if c == 0 {
                            (0, 1)
                        } else {
                            let block = (c - 1) / m;
                            let i = (c - 1) % m;
                            (1 + block * m + (i + t) % m, 1)
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(group.clone(), dims, labels, boundary, action, sub)
    }

    /// Product with the diagonal action. Both factors carry subcomplexes
    /// `S₁`, `S₂`; the product pair is `(X₁×X₂, S₁×X₂ ∪ X₁×S₂)`.
    pub fn product(&self, other: &FlatComplex) -> Result<FlatComplex> {
        if self.group != other.group {
            return Err(Error::Shape("product of complexes over different groups".into()));
        }
        let nb = other.len();
        let idx = |a: usize, b: usize| a * nb + b;
        let mut dims = Vec::new();
        let mut labels = Vec::new();
        let mut boundary = Vec::new();
        let mut sub = Vec::new();
        for a in 0..self.len() {
            for b in 0..nb {
                dims.push(self.dims[a] + other.dims[b]);
                labels.push(format!("{}x{}", self.labels[a], other.labels[b]));
                sub.push(self.sub[a] || other.sub[b]);
                let sign = if self.dims[a].is_multiple_of(2) { 1 } else { -1 };
                let mut chain: Chain = self.boundary[a].iter().map(|&(f, m)| (idx(f, b), m)).collect();
                chain.extend(other.boundary[b].iter().map(|&(f, m)| (idx(a, f), sign * m)));
                boundary.push(chain);
            }
        }
        let action = self
            .group
            .elements()
            .map(|g| {
                (0..self.len())
                    .flat_map(|a| {
                        (0..nb).map(move |b| {
                            let (ia, sa) = self.action[g][a];
                            let (ib, sb) = other.action[g][b];
                            (idx(ia, ib), sa * sb)
                        })
                    })
                    .collect()
            })
            .collect();
        FlatComplex::new(self.group.clone(), dims, labels, boundary, action, sub)
    }

    /// `G ×_H X` for a complex over `H` given as `parent.restrict_to(h)`.
    pub fn induce(&self, parent: &FiniteGroup, h: &Subgroup) -> Result<FlatComplex> {
        if self.group != parent.restrict_to(h) {
            return Err(Error::Shape("complex is not over the given subgroup".into()));
        }
        let reps = parent.left_cosets(h);
        let n = self.len();
        let idx = |i: usize, c: usize| i * n + c;
        let mut dims = Vec::new();
        let mut labels = Vec::new();
        let mut boundary = Vec::new();
        let mut sub = Vec::new();
        for (i, &t) in reps.iter().enumerate() {
            for c in 0..n {
                dims.push(self.dims[c]);
                labels.push(format!("{t}*{}", self.labels[c]));
                sub.push(self.sub[c]);
                boundary.push(self.boundary[c].iter().map(|&(f, m)| (idx(i, f), m)).collect());
            }
        }
        let local = |x: usize| h.elements().binary_search(&x).expect("element of H");
        let action = parent
            .elements()
            .map(|g| {
                reps.iter()
                    .flat_map(|&t| {
                        let gt = parent.mul(g, t);
                        let tj = parent.coset_rep(gt, h);
                        let j = reps.binary_search(&tj).expect("coset representative");
                        let hh = local(parent.mul(parent.inv(tj), gt));
                        (0..n).map(move |c| {
                            let (img, s) = self.action[hh][c];
                            (idx(j, img), s)
                        })
                    })
                    .collect()
            })
            .collect();
        FlatComplex::new(parent.clone(), dims, labels, boundary, action, sub)
    }

    /// Folds into orbit form. The orbit representative is the lowest-index
    /// cell of each orbit; the subcomplex is carried over.
    pub fn to_gcw(&self) -> Result<GCWComplex> {
        let grp = &self.group;
        let n = self.len();
        // (orbit, transporter x, sign s) with cell = s·x·e_orbit
        let mut place: Vec<Option<(usize, usize, i64)>> = vec![None; n];
        let mut reps: Vec<usize> = Vec::new();
        let mut cells = Vec::new();
        for c in 0..n {
            if place[c].is_some() {
                continue;
            }
            let orbit = reps.len();
            reps.push(c);
            let stab: Vec<usize> = grp.elements().filter(|&g| self.action[g][c].0 == c).collect();
            cells.push(CellOrbit {
                dim: self.dims[c],
                label: self.labels[c].clone(),
                stabilizer: grp.subgroup(&stab)?,
            });
            for g in grp.elements() {
                let (img, s) = self.action[g][c];
                if place[img].is_none() {
                    place[img] = Some((orbit, g, s));
                }
            }
        }
        let mut records = Vec::new();
        for (alpha, &c) in reps.iter().enumerate() {
            let mut merged: BTreeMap<(usize, usize), i64> = BTreeMap::new();
            for &(f, m) in &self.boundary[c] {
                let (beta, x, s) = place[f].expect("every cell placed");
                let key = (beta, grp.coset_rep(x, &cells[beta].stabilizer));
                *merged.entry(key).or_default() += m * s;
            }
            records.extend(merged.into_iter().filter(|&(_, d)| d != 0).map(|((face, coset), degree)| BoundaryRecord {
                cell: alpha,
                face,
                coset,
                degree,
            }));
        }
        let sub_orbits: Vec<usize> = (0..reps.len()).filter(|&a| self.sub[reps[a]]).collect();
        GCWComplex::new(grp.clone(), cells, records)?.with_subcomplex(&sub_orbits)
    }
}
