//! Column-by-column evaluation of the coefficient recurrences.
//!
//! Column `n` holds one entry per distinct openness level at size `n`.
//! Levels at or above the stabilization level of `n` (and above the top
//! level of the bounded and superclass families) all share one stored
//! entry, which keeps every column finite.

use crate::size_model::SizeSpec;

use super::weights::Weights;
use super::Family;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Storage<V> {
    /// `cols[n][level]`
    Levels(Vec<Vec<V>>),
    /// `cols[n][level][q]`
    ByAbstractions(Vec<Vec<Vec<V>>>),
    /// `cols[n][level] = [non-abstraction normal forms, normal forms]`
    NormalForms(Vec<Vec<[V; 2]>>),
}

/// Memoized counts for one family under one size model.
#[derive(Debug, Clone)]
pub struct CountTable<W: Weights> {
    pub(crate) spec: SizeSpec,
    pub(crate) family: Family,
    pub(crate) weights: W,
    pub(crate) max_n: u64,
    pub(crate) max_level: u64,
    pub(crate) storage: Storage<W::Value>,
}

#[derive(Clone, Copy)]
struct Shape {
    spec: SizeSpec,
    /// Level at which the recursion closes on itself (h or N), if any.
    top: Option<u64>,
    /// Whether the top level admits every index (superclass) or only
    /// indices up to the top (bounded successors).
    top_unbounded: bool,
}

impl Shape {
    fn of(spec: SizeSpec, family: Family) -> Shape {
        let (top, top_unbounded) = match family {
            Family::MOpen | Family::QAbstractions { .. } | Family::NormalForm => (None, false),
            Family::Unrestricted => (Some(0), true),
            Family::BoundedSuccessors { h } => (Some(h), false),
            Family::Superclass { top } => (Some(top), true),
        };
        Shape { spec, top, top_unbounded }
    }

    /// Highest distinct level at size `n`.
    fn alias_max(&self, n: u64) -> u64 {
        let cap = self.spec.stabilization_level(n);
        self.top.map_or(cap, |t| t.min(cap))
    }

    fn alias(&self, level: u64, n: u64) -> u64 {
        level.min(self.alias_max(n))
    }

    /// Whether the leaf with `s` successors may occur at stored level `e`.
    fn leaf_allowed(&self, e: u64, s: u64) -> bool {
        if self.top == Some(e) && self.top_unbounded {
            true
        } else {
            s < e
        }
    }
}

impl<W: Weights> CountTable<W> {
    /// Builds all entries with size `<= max_n` that are needed to answer
    /// queries at levels `<= max_level`.
    pub fn build(spec: SizeSpec, family: Family, max_n: u64, max_level: u64, weights: W) -> Self {
        let shape = Shape::of(spec, family);
        let storage = match family {
            Family::QAbstractions { max_q } => {
                Storage::ByAbstractions(build_q(&shape, &weights, max_n, max_level, max_q))
            }
            Family::NormalForm => Storage::NormalForms(build_nf(&shape, &weights, max_n, max_level)),
            _ => Storage::Levels(build_levels(&shape, &weights, max_n, max_level)),
        };
        CountTable { spec, family, weights, max_n, max_level, storage }
    }

    pub fn spec(&self) -> SizeSpec {
        self.spec
    }
    pub fn family(&self) -> Family {
        self.family
    }
    pub fn max_n(&self) -> u64 {
        self.max_n
    }
    pub fn max_level(&self) -> u64 {
        self.max_level
    }
    pub fn weights(&self) -> &W {
        &self.weights
    }

    /// Whether `(m, n)` lies inside the computed region.
    pub fn covers(&self, m: u64, n: u64) -> bool {
        let Some(e) = self.slot(m, n) else { return false };
        let n = n as usize;
        match &self.storage {
            Storage::Levels(cols) => e < cols[n].len(),
            Storage::NormalForms(cols) => e < cols[n].len(),
            Storage::ByAbstractions(cols) => e < cols[n].len(),
        }
    }

    fn shape(&self) -> Shape {
        Shape::of(self.spec, self.family)
    }

    fn slot(&self, m: u64, n: u64) -> Option<usize> {
        if n > self.max_n {
            return None;
        }
        Some(self.shape().alias(m, n) as usize)
    }

    /// Entry for level `m` and size `n`, for every family except
    /// [`Family::QAbstractions`].
    pub fn get(&self, m: u64, n: u64) -> Option<&W::Value> {
        let e = self.slot(m, n)?;
        match &self.storage {
            Storage::Levels(cols) => cols[n as usize].get(e),
            Storage::NormalForms(cols) => cols[n as usize].get(e).map(|p| &p[1]),
            Storage::ByAbstractions(_) => None,
        }
    }

    /// Entry for level `m`, exactly `q` abstractions and size `n`.
    pub fn get_q(&self, m: u64, q: u64, n: u64) -> Option<&W::Value> {
        let e = self.slot(m, n)?;
        match &self.storage {
            Storage::ByAbstractions(cols) => cols[n as usize].get(e)?.get(q as usize),
            _ => None,
        }
    }

    /// Every stored cell as `(level, n, [q,] value)`, in storage order.
    pub(crate) fn cells(&self) -> Vec<(u64, u64, Option<u64>, &W::Value)> {
        let mut out = Vec::new();
        match &self.storage {
            Storage::Levels(cols) => {
                for (n, col) in cols.iter().enumerate() {
                    for (e, v) in col.iter().enumerate() {
                        out.push((e as u64, n as u64, None, v));
                    }
                }
            }
            Storage::NormalForms(cols) => {
                for (n, col) in cols.iter().enumerate() {
                    for (e, v) in col.iter().enumerate() {
                        out.push((e as u64, n as u64, None, &v[1]));
                    }
                }
            }
            Storage::ByAbstractions(cols) => {
                for (n, col) in cols.iter().enumerate() {
                    for (e, row) in col.iter().enumerate() {
                        for (q, v) in row.iter().enumerate() {
                            out.push((e as u64, n as u64, Some(q as u64), v));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Number of stored levels at column `n`.
fn stored_levels(shape: &Shape, n: u64, max_n: u64, max_level: u64) -> usize {
    let reach = max_level.saturating_add((max_n - n) / shape.spec.c());
    (shape.alias_max(n).min(reach) + 1) as usize
}

/// Index range `i` of a convolution `sum x_i y_(s-i)` at column `n`. With
/// `d = 0` the pairs touching size 0 or size `n` are dropped: there are no
/// size-0 terms in that case.
fn conv_range(spec: &SizeSpec, n: u64) -> Option<(u64, u64)> {
    let d = spec.d();
    if n < d {
        return None;
    }
    let s = n - d;
    if d == 0 {
        if s < 2 {
            None
        } else {
            Some((1, s - 1))
        }
    } else {
        Some((0, s))
    }
}

fn leaf_term<W: Weights>(shape: &Shape, w: &W, e: u64, n: u64) -> W::Value {
    match shape.spec.leaf_successors(n) {
        Some(s) if shape.leaf_allowed(e, s) => w.unit(n),
        _ => w.zero(),
    }
}

fn build_levels<W: Weights>(shape: &Shape, w: &W, max_n: u64, max_level: u64) -> Vec<Vec<W::Value>> {
    let spec = shape.spec;
    let (c, d) = (spec.c(), spec.d());
    let mut cols: Vec<Vec<W::Value>> = Vec::with_capacity(max_n as usize + 1);
    for n in 0..=max_n {
        let len = stored_levels(shape, n, max_n, max_level);
        let mut col = Vec::with_capacity(len);
        for e in 0..len as u64 {
            let mut v = leaf_term(shape, w, e, n);
            if n >= c {
                let below = n - c;
                let up = shape.alias(e + 1, below) as usize;
                w.add_assign(&mut v, &w.shifted(cols[below as usize][up].clone(), c));
            }
            if let Some((lo, hi)) = conv_range(&spec, n) {
                let s = n - d;
                let at = |i: u64| &cols[i as usize][shape.alias(e, i) as usize];
                let mut acc = w.zero();
                // symmetric: pair (i, s-i) once, middle once
                let mut i = lo;
                while i < s - i && i <= hi {
                    let x = at(i);
                    if !w.is_zero(x) {
                        let y = at(s - i);
                        if !w.is_zero(y) {
                            w.add_product(&mut acc, x, y);
                        }
                    }
                    i += 1;
                }
                let doubled = {
                    let mut twice = acc.clone();
                    w.add_assign(&mut twice, &acc);
                    twice
                };
                acc = doubled;
                if s % 2 == 0 && s / 2 >= lo && s / 2 <= hi {
                    let x = at(s / 2);
                    if !w.is_zero(x) {
                        w.add_product(&mut acc, x, x);
                    }
                }
                w.add_assign(&mut v, &w.shifted(acc, d));
            }
            col.push(v);
        }
        cols.push(col);
    }
    cols
}

fn build_nf<W: Weights>(shape: &Shape, w: &W, max_n: u64, max_level: u64) -> Vec<Vec<[W::Value; 2]>> {
    let spec = shape.spec;
    let (c, d) = (spec.c(), spec.d());
    let mut cols: Vec<Vec<[W::Value; 2]>> = Vec::with_capacity(max_n as usize + 1);
    for n in 0..=max_n {
        let len = stored_levels(shape, n, max_n, max_level);
        let mut col = Vec::with_capacity(len);
        for e in 0..len as u64 {
            // neutral: leaves and applications whose left operand is neutral
            let mut neutral = leaf_term(shape, w, e, n);
            if let Some((lo, hi)) = conv_range(&spec, n) {
                let s = n - d;
                let mut acc = w.zero();
                for i in lo..=hi {
                    let x = &cols[i as usize][shape.alias(e, i) as usize][0];
                    if w.is_zero(x) {
                        continue;
                    }
                    let j = s - i;
                    let y = &cols[j as usize][shape.alias(e, j) as usize][1];
                    w.add_product(&mut acc, x, y);
                }
                w.add_assign(&mut neutral, &w.shifted(acc, d));
            }
            let mut normal = neutral.clone();
            if n >= c {
                let below = n - c;
                let up = shape.alias(e + 1, below) as usize;
                w.add_assign(&mut normal, &w.shifted(cols[below as usize][up][1].clone(), c));
            }
            col.push([neutral, normal]);
        }
        cols.push(col);
    }
    cols
}

fn build_q<W: Weights>(
    shape: &Shape,
    w: &W,
    max_n: u64,
    max_level: u64,
    max_q: u64,
) -> Vec<Vec<Vec<W::Value>>> {
    let spec = shape.spec;
    let (c, d) = (spec.c(), spec.d());
    let mut cols: Vec<Vec<Vec<W::Value>>> = Vec::with_capacity(max_n as usize + 1);
    for n in 0..=max_n {
        let len = stored_levels(shape, n, max_n, max_level);
        let q_len = (max_q.min(n / c) + 1) as usize;
        let mut col = Vec::with_capacity(len);
        for e in 0..len as u64 {
            let mut row = Vec::with_capacity(q_len);
            for q in 0..q_len as u64 {
                let mut v = if q == 0 { leaf_term(shape, w, e, n) } else { w.zero() };
                if q > 0 && n >= c {
                    let below = n - c;
                    let up = shape.alias(e + 1, below) as usize;
                    if let Some(x) = cols[below as usize][up].get(q as usize - 1) {
                        w.add_assign(&mut v, &w.shifted(x.clone(), c));
                    }
                }
                if let Some((lo, hi)) = conv_range(&spec, n) {
                    let s = n - d;
                    let mut acc = w.zero();
                    for i in lo..=hi {
                        let left = &cols[i as usize][shape.alias(e, i) as usize];
                        let j = s - i;
                        let right = &cols[j as usize][shape.alias(e, j) as usize];
                        for l in 0..=q {
                            let (Some(x), Some(y)) = (left.get(l as usize), right.get((q - l) as usize))
                            else {
                                continue;
                            };
                            if !w.is_zero(x) && !w.is_zero(y) {
                                w.add_product(&mut acc, x, y);
                            }
                        }
                    }
                    w.add_assign(&mut v, &w.shifted(acc, d));
                }
                row.push(v);
            }
            col.push(row);
        }
        cols.push(col);
    }
    cols
}

/// Why a list of cells does not form a table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum LayoutError {
    Missing { m: u64, n: u64, q: Option<u64> },
    Unexpected { m: u64, n: u64, q: Option<u64> },
    /// A stored normal-form count is smaller than the part it contains.
    Inconsistent { m: u64, n: u64 },
}

impl CountTable<super::weights::Exact> {
    /// Rebuilds a table from the cells produced by [`CountTable::cells`],
    /// which must appear in the same order.
    pub(crate) fn from_cells<I>(
        spec: SizeSpec,
        family: Family,
        max_n: u64,
        max_level: u64,
        cells: I,
    ) -> Result<Self, LayoutError>
    where
        I: IntoIterator<Item = (u64, u64, Option<u64>, num_bigint::BigUint)>,
    {
        use super::weights::Exact;
        let shape = Shape::of(spec, family);
        let mut cells = cells.into_iter();
        let mut next = |m: u64, n: u64, q: Option<u64>| match cells.next() {
            Some((cm, cn, cq, v)) if (cm, cn, cq) == (m, n, q) => Ok(v),
            Some((m, n, q, _)) => Err(LayoutError::Unexpected { m, n, q }),
            None => Err(LayoutError::Missing { m, n, q }),
        };
        let levels = |n: u64| 0..stored_levels(&shape, n, max_n, max_level) as u64;
        let storage = match family {
            Family::QAbstractions { max_q } => {
                let mut cols = Vec::new();
                for n in 0..=max_n {
                    let q_len = max_q.min(n / spec.c()) + 1;
                    let mut col = Vec::new();
                    for e in levels(n) {
                        let row = (0..q_len).map(|q| next(e, n, Some(q))).collect::<Result<_, _>>()?;
                        col.push(row);
                    }
                    cols.push(col);
                }
                Storage::ByAbstractions(cols)
            }
            Family::NormalForm => {
                let c = spec.c();
                let mut cols: Vec<Vec<[num_bigint::BigUint; 2]>> = Vec::new();
                for n in 0..=max_n {
                    let mut col = Vec::new();
                    for e in levels(n) {
                        let normal = next(e, n, None)?;
                        // normal = neutral + (abstractions, one level up)
                        let abs = if n >= c {
                            let below = n - c;
                            cols[below as usize][shape.alias(e + 1, below) as usize][1].clone()
                        } else {
                            Default::default()
                        };
                        if abs > normal {
                            return Err(LayoutError::Inconsistent { m: e, n });
                        }
                        col.push([&normal - abs, normal]);
                    }
                    cols.push(col);
                }
                Storage::NormalForms(cols)
            }
            _ => {
                let mut cols = Vec::new();
                for n in 0..=max_n {
                    let col = levels(n).map(|e| next(e, n, None)).collect::<Result<_, _>>()?;
                    cols.push(col);
                }
                Storage::Levels(cols)
            }
        };
        if let Some((m, n, q, _)) = cells.next() {
            return Err(LayoutError::Unexpected { m, n, q });
        }
        Ok(CountTable { spec, family, weights: Exact, max_n, max_level, storage })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::Exact;
    use crate::size_model::Preset;

    #[test]
    fn columns_stay_finite() {
        let t = CountTable::build(Preset::Natural.spec(), Family::MOpen, 30, 2, Exact);
        let Storage::Levels(cols) = &t.storage else { unreachable!() };
        // level 2 needs up to level 2 + 30 at n = 0, capped by stabilization
        assert_eq!(cols[0].len(), 1);
        assert_eq!(cols[30].len(), 3);
        assert!(cols.iter().all(|c| c.len() <= 31));
    }

    #[test]
    fn cells_round_trip() {
        let spec = Preset::LessNatural.spec();
        for family in [
            Family::MOpen,
            Family::NormalForm,
            Family::QAbstractions { max_q: 3 },
            Family::Superclass { top: 2 },
        ] {
            let t = CountTable::build(spec, family, 15, 3, Exact);
            let cells: Vec<_> = t.cells().into_iter().map(|(m, n, q, v)| (m, n, q, v.clone())).collect();
            let back = CountTable::from_cells(spec, family, 15, 3, cells.clone()).unwrap();
            assert_eq!(back.storage, t.storage, "{family}");
            let short = cells[..cells.len() - 1].to_vec();
            assert!(CountTable::from_cells(spec, family, 15, 3, short).is_err());
        }
    }
}
