//! Greedy binary recursive partitioning whose leaves keep the raw training
//! targets as donor pools.
//!
//! Numeric targets split on SSE reduction, categorical targets on Gini
//! reduction (both weighted by node size). Categorical predictors with at
//! most [`EXHAUSTIVE_LEVELS`] present levels are split by scanning every
//! level subset; larger ones are ordered by mean target (or by the rate of
//! the node's majority class) and scanned as an ordered predictor.

use rand::seq::index::sample;
use rand::Rng;

use super::features::{FeatureKind, FeatureMatrix, Target};
use crate::data::mode_of;
use crate::error::{Error, Result};

pub const EXHAUSTIVE_LEVELS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartParams {
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    /// Minimum impurity reduction, as a fraction of the root impurity.
    pub min_improvement: f64,
}

impl Default for CartParams {
    fn default() -> Self {
        CartParams {
            min_leaf: 5,
            max_depth: None,
            min_improvement: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SplitRule {
    /// Rows with `x <= threshold` go left.
    Threshold(f64),
    /// Rows whose level is flagged go left; unseen levels go right.
    Levels(Vec<bool>),
}

impl SplitRule {
    #[inline]
    fn goes_left(&self, x: f64) -> bool {
        match self {
            SplitRule::Threshold(t) => x <= *t,
            SplitRule::Levels(set) => set.get(x as usize).copied().unwrap_or(false),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        rule: SplitRule,
        left: usize,
        right: usize,
    },
    Leaf(Leaf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Leaf {
    /// Training target values routed here; never empty.
    pub donors: Vec<f64>,
    pub mean: f64,
    /// Majority level for categorical targets (ties to the lowest index).
    pub majority: usize,
}

impl Leaf {
    fn new(target: &Target, rows: &[usize]) -> Leaf {
        let donors: Vec<f64> = rows.iter().map(|&i| target.value(i)).collect();
        let mean = donors.iter().sum::<f64>() / donors.len() as f64;
        let majority = match target {
            Target::Categorical { levels, n_levels } => mode_of(rows.iter().map(|&i| levels[i]), *n_levels),
            Target::Numeric(_) => 0,
        };
        Leaf { donors, mean, majority }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.donors[rng.random_range(0..self.donors.len())]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartTree {
    nodes: Vec<Node>,
    n_features: usize,
    categorical: bool,
}

impl CartTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// True when fitted on a categorical target.
    pub fn is_categorical(&self) -> bool {
        self.categorical
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], k: usize) -> usize {
            match &nodes[k] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn leaf_for(&self, x: &[f64]) -> &Leaf {
        let mut k = 0;
        loop {
            match &self.nodes[k] {
                Node::Leaf(leaf) => return leaf,
                Node::Split { feature, rule, left, right } => {
                    k = if rule.goes_left(x[*feature]) { *left } else { *right };
                }
            }
        }
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Leaf> {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf(l) => Some(l),
            Node::Split { .. } => None,
        })
    }
}

/// Fits a single tree over all rows, considering every feature at each split.
pub fn fit_cart(x: &FeatureMatrix, y: &Target, params: &CartParams) -> Result<CartTree> {
    let rows: Vec<usize> = (0..x.n_rows()).collect();
    grow::<crate::rng::StreamRng>(x, y, rows, params, None)
}

/// Fits a tree on the given (possibly repeated) rows; when `feature_sampling`
/// is set, each split considers `mtry` features drawn without replacement.
pub(crate) fn grow<R: Rng>(
    x: &FeatureMatrix,
    y: &Target,
    rows: Vec<usize>,
    params: &CartParams,
    mut feature_sampling: Option<(&mut R, usize)>,
) -> Result<CartTree> {
    if rows.is_empty() || y.is_empty() {
        return Err(Error::Fit("empty fitting set".into()));
    }
    if y.len() != x.n_rows() {
        return Err(Error::Shape(format!("{} targets for {} feature rows", y.len(), x.n_rows())));
    }
    if params.min_leaf == 0 {
        return Err(Error::Config("min_leaf must be at least 1".into()));
    }
    if rows.len() < 2 * params.min_leaf {
        return Err(Error::Fit(format!(
            "{} rows is fewer than twice min_leaf = {}",
            rows.len(),
            params.min_leaf
        )));
    }

    let p = x.n_features();
    let root_impurity = impurity(y, &rows);
    let min_gain = params.min_improvement * root_impurity;

    let mut ws = Workspace::new(x, y, rows);
    let n = ws.rows.len();
    // children start as placeholders and become leaves when popped unsplit
    let placeholder = || Node::Leaf(Leaf { donors: Vec::new(), mean: 0.0, majority: 0 });
    let mut nodes: Vec<Node> = vec![placeholder()];
    // (node index, sample range, depth)
    let mut stack = vec![(0usize, 0usize, n, 0usize)];
    let mut scratch = SplitScratch::default();
    let mut node_rows: Vec<usize> = Vec::with_capacity(n);

    let ctx = SplitContext { x, y, params, min_gain };
    while let Some((k, lo, hi, depth)) = stack.pop() {
        node_rows.clear();
        node_rows.extend(ws.ids[lo..hi].iter().map(|&s| ws.rows[s as usize]));
        let depth_ok = params.max_depth.is_none_or(|d| depth < d);
        let found = if depth_ok && hi - lo >= 2 * params.min_leaf {
            ctx.best(&ws, &node_rows, lo, hi, &mut feature_sampling, &mut scratch)
        } else {
            None
        };
        let Some((feature, rule)) = found else {
            nodes[k] = Node::Leaf(Leaf::new(y, &node_rows));
            continue;
        };
        let mid = ws.partition(lo, hi, feature, &rule);
        debug_assert!(mid - lo >= params.min_leaf && hi - mid >= params.min_leaf);
        let left = nodes.len();
        nodes.push(placeholder());
        let right = nodes.len();
        nodes.push(placeholder());
        nodes[k] = Node::Split { feature, rule, left, right };
        stack.push((right, mid, hi, depth + 1));
        stack.push((left, lo, mid, depth + 1));
    }

    Ok(CartTree {
        nodes,
        n_features: p,
        categorical: matches!(y, Target::Categorical { .. }),
    })
}

struct SplitContext<'a> {
    x: &'a FeatureMatrix,
    y: &'a Target,
    params: &'a CartParams,
    min_gain: f64,
}

impl SplitContext<'_> {
    /// Best admissible split of the samples in `lo..hi`, if any.
    fn best<R: Rng>(
        &self,
        ws: &Workspace,
        node_rows: &[usize],
        lo: usize,
        hi: usize,
        feature_sampling: &mut Option<(&mut R, usize)>,
        scratch: &mut SplitScratch,
    ) -> Option<(usize, SplitRule)> {
        let p = self.x.n_features();
        let candidates: Vec<usize> = match feature_sampling.as_mut() {
            Some((rng, mtry)) if *mtry < p => sample(*rng, p, *mtry).into_vec(),
            _ => (0..p).collect(),
        };
        let min_leaf = self.params.min_leaf;
        let mut best: Option<Candidate> = None;
        for f in candidates {
            let found = match self.x.kinds()[f] {
                FeatureKind::Numeric => numeric_split(ws, self.y, f, lo, hi, min_leaf, scratch),
                FeatureKind::Categorical { n_levels } => {
                    categorical_split(self.x, self.y, node_rows, f, n_levels, min_leaf)
                }
            };
            if let Some(c) = found {
                if best.as_ref().is_none_or(|b| c.gain > b.gain) {
                    best = Some(c);
                }
            }
        }
        let best = best?;
        if best.gain <= 0.0 || best.gain < self.min_gain {
            return None;
        }
        Some((best.feature, best.rule))
    }
}

/// Fitting rows ("samples", repeats allowed) with per-feature orders sorted
/// once at the root. Every node owns the same index range in each order;
/// splitting stably partitions the range, so children stay sorted.
struct Workspace {
    rows: Vec<usize>,
    /// `xcol[f][s]`: feature `f` of sample `s`.
    xcol: Vec<Vec<f64>>,
    /// Target per sample (level index for categorical targets).
    ycol: Vec<f64>,
    /// Samples by value of each numeric feature; empty for categorical ones.
    sorted: Vec<Vec<u32>>,
    /// Samples in input order.
    ids: Vec<u32>,
    goes_left: Vec<bool>,
    tmp: Vec<u32>,
}

impl Workspace {
    fn new(x: &FeatureMatrix, y: &Target, rows: Vec<usize>) -> Self {
        let n = rows.len();
        let xcol: Vec<Vec<f64>> = (0..x.n_features())
            .map(|f| rows.iter().map(|&i| x.get(i, f)).collect())
            .collect();
        let sorted = x
            .kinds()
            .iter()
            .enumerate()
            .map(|(f, kind)| match kind {
                FeatureKind::Numeric => {
                    let mut keyed: Vec<(f64, u32)> = xcol[f].iter().copied().zip(0..n as u32).collect();
                    keyed.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                    keyed.into_iter().map(|(_, s)| s).collect()
                }
                FeatureKind::Categorical { .. } => Vec::new(),
            })
            .collect();
        Workspace {
            ycol: rows.iter().map(|&i| y.value(i)).collect(),
            rows,
            xcol,
            sorted,
            ids: (0..n as u32).collect(),
            goes_left: vec![false; n],
            tmp: Vec::with_capacity(n),
        }
    }

    /// Splits `lo..hi` into `lo..mid` (left) and `mid..hi` in every order.
    fn partition(&mut self, lo: usize, hi: usize, feature: usize, rule: &SplitRule) -> usize {
        let col = &self.xcol[feature];
        for &s in &self.ids[lo..hi] {
            self.goes_left[s as usize] = rule.goes_left(col[s as usize]);
        }
        let goes_left = &self.goes_left;
        let tmp = &mut self.tmp;
        let mut mid = lo;
        for order in self.sorted.iter_mut().filter(|o| !o.is_empty()).chain(std::iter::once(&mut self.ids)) {
            tmp.clear();
            let slice = &mut order[lo..hi];
            let mut w = 0;
            for r in 0..slice.len() {
                let s = slice[r];
                if goes_left[s as usize] {
                    slice[w] = s;
                    w += 1;
                } else {
                    tmp.push(s);
                }
            }
            slice[w..].copy_from_slice(tmp);
            mid = lo + w;
        }
        mid
    }
}

/// Draws one donor from the leaf `x_new` routes to.
pub fn draw_cart<R: Rng + ?Sized>(tree: &CartTree, x_new: &[f64], rng: &mut R) -> Result<f64> {
    if x_new.len() != tree.n_features {
        return Err(Error::Shape(format!(
            "row has {} features, tree expects {}",
            x_new.len(),
            tree.n_features
        )));
    }
    Ok(tree.leaf_for(x_new).draw(rng))
}

/// Size-weighted impurity: SSE for numeric targets, `n * Gini` for categorical.
pub(crate) fn impurity(y: &Target, rows: &[usize]) -> f64 {
    match y {
        Target::Numeric(v) => {
            let mean = rows.iter().map(|&i| v[i]).sum::<f64>() / rows.len() as f64;
            rows.iter().map(|&i| (v[i] - mean).powi(2)).sum()
        }
        Target::Categorical { levels, n_levels } => {
            let mut counts = vec![0usize; *n_levels];
            for &i in rows {
                counts[levels[i]] += 1;
            }
            gini_weighted(&counts, rows.len())
        }
    }
}

fn gini_weighted(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let ss: f64 = counts.iter().map(|&c| (c * c) as f64).sum();
    n as f64 - ss / n as f64
}

struct Candidate {
    feature: usize,
    rule: SplitRule,
    gain: f64,
}

#[derive(Default)]
struct SplitScratch {
    centered: Vec<f64>,
    left_counts: Vec<usize>,
    total_counts: Vec<usize>,
}

/// Per-node sufficient statistics of a group of rows.
#[derive(Clone)]
struct GroupStats {
    n: usize,
    /// Sum of centered numeric targets.
    sum: f64,
    counts: Vec<usize>,
}

fn numeric_split(
    ws: &Workspace,
    y: &Target,
    f: usize,
    lo: usize,
    hi: usize,
    min_leaf: usize,
    scratch: &mut SplitScratch,
) -> Option<Candidate> {
    let n = hi - lo;
    let order = &ws.sorted[f][lo..hi];
    let col = &ws.xcol[f];
    let xv = |k: usize| col[order[k] as usize];
    if xv(0) == xv(n - 1) {
        return None;
    }

    let mut best_gain = f64::NEG_INFINITY;
    let mut best_pos = 0usize;

    match y {
        Target::Numeric(_) => {
            // Centering makes the gain exactly zero for constant targets.
            let yv = &ws.ycol;
            let mean = ws.ids[lo..hi].iter().map(|&s| yv[s as usize]).sum::<f64>() / n as f64;
            let c = &mut scratch.centered;
            c.clear();
            c.extend(order.iter().map(|&s| yv[s as usize] - mean));
            let total: f64 = c.iter().sum();
            let mut left = 0.0;
            for pos in 1..n {
                left += c[pos - 1];
                if pos < min_leaf || n - pos < min_leaf {
                    continue;
                }
                if xv(pos - 1) == xv(pos) {
                    continue;
                }
                let right = total - left;
                let gain = left * left / pos as f64 + right * right / (n - pos) as f64 - total * total / n as f64;
                if gain > best_gain {
                    best_gain = gain;
                    best_pos = pos;
                }
            }
        }
        Target::Categorical { n_levels, .. } => {
            let lc = &mut scratch.left_counts;
            let tc = &mut scratch.total_counts;
            lc.clear();
            lc.resize(*n_levels, 0);
            tc.clear();
            tc.resize(*n_levels, 0);
            for &s in order {
                tc[ws.ycol[s as usize] as usize] += 1;
            }
            let parent = gini_weighted(tc, n);
            // Track sum of squared counts incrementally.
            let mut ss_left = 0.0f64;
            let mut ss_right: f64 = tc.iter().map(|&c| (c * c) as f64).sum();
            for pos in 1..n {
                let l = ws.ycol[order[pos - 1] as usize] as usize;
                let cl = lc[l] as f64;
                let cr = (tc[l] - lc[l]) as f64;
                ss_left += 2.0 * cl + 1.0;
                ss_right -= 2.0 * cr - 1.0;
                lc[l] += 1;
                if pos < min_leaf || n - pos < min_leaf {
                    continue;
                }
                if xv(pos - 1) == xv(pos) {
                    continue;
                }
                let gl = pos as f64 - ss_left / pos as f64;
                let gr = (n - pos) as f64 - ss_right / (n - pos) as f64;
                let gain = parent - gl - gr;
                if gain > best_gain {
                    best_gain = gain;
                    best_pos = pos;
                }
            }
        }
    }

    if best_pos == 0 {
        return None;
    }
    let (below, above) = (xv(best_pos - 1), xv(best_pos));
    let mut threshold = below + (above - below) / 2.0;
    if threshold >= above {
        threshold = below;
    }
    Some(Candidate {
        feature: f,
        rule: SplitRule::Threshold(threshold),
        gain: best_gain,
    })
}

fn categorical_split(
    x: &FeatureMatrix,
    y: &Target,
    rows: &[usize],
    f: usize,
    n_levels: usize,
    min_leaf: usize,
) -> Option<Candidate> {
    let n_classes = match y {
        Target::Categorical { n_levels, .. } => *n_levels,
        Target::Numeric(_) => 0,
    };
    let mean = match y {
        Target::Numeric(v) => rows.iter().map(|&i| v[i]).sum::<f64>() / rows.len() as f64,
        Target::Categorical { .. } => 0.0,
    };
    let empty = GroupStats {
        n: 0,
        sum: 0.0,
        counts: vec![0; n_classes],
    };
    let mut per_level = vec![empty.clone(); n_levels];
    for &i in rows {
        let g = &mut per_level[x.get(i, f) as usize];
        g.n += 1;
        match y {
            Target::Numeric(v) => g.sum += v[i] - mean,
            Target::Categorical { levels, .. } => g.counts[levels[i]] += 1,
        }
    }
    let present: Vec<usize> = (0..n_levels).filter(|&l| per_level[l].n > 0).collect();
    if present.len() < 2 {
        return None;
    }
    let total = merge(&empty, present.iter().map(|&l| &per_level[l]));
    let parent = group_impurity(&total, y);

    let gain_of = |left: &GroupStats| -> Option<f64> {
        let right_n = total.n - left.n;
        if left.n < min_leaf || right_n < min_leaf {
            return None;
        }
        let right = GroupStats {
            n: right_n,
            sum: total.sum - left.sum,
            counts: total.counts.iter().zip(&left.counts).map(|(t, l)| t - l).collect(),
        };
        Some(parent - group_impurity(left, y) - group_impurity(&right, y))
    };

    let mut best: Option<(f64, Vec<bool>)> = None;
    let mut consider = |gain: f64, set: Vec<bool>| {
        if best.as_ref().is_none_or(|(g, _)| gain > *g) {
            best = Some((gain, set));
        }
    };

    if present.len() <= EXHAUSTIVE_LEVELS {
        // First present level stays on the left to avoid mirrored duplicates.
        let k = present.len();
        for bits in 0u32..(1u32 << (k - 1)) {
            let members: Vec<usize> = std::iter::once(present[0])
                .chain((1..k).filter(|b| bits & (1 << (b - 1)) != 0).map(|b| present[b]))
                .collect();
            if members.len() == k {
                continue;
            }
            let left = merge(&empty, members.iter().map(|&l| &per_level[l]));
            if let Some(g) = gain_of(&left) {
                let mut set = vec![false; n_levels];
                for &l in &members {
                    set[l] = true;
                }
                consider(g, set);
            }
        }
    } else {
        let majority = match y {
            Target::Categorical { .. } => {
                let mut best_c = 0;
                for (c, &cnt) in total.counts.iter().enumerate() {
                    if cnt > total.counts[best_c] {
                        best_c = c;
                    }
                }
                best_c
            }
            Target::Numeric(_) => 0,
        };
        let score = |g: &GroupStats| match y {
            Target::Numeric(_) => g.sum / g.n as f64,
            Target::Categorical { .. } => g.counts[majority] as f64 / g.n as f64,
        };
        let mut ordered = present.clone();
        ordered.sort_by(|&a, &b| score(&per_level[a]).total_cmp(&score(&per_level[b])).then(a.cmp(&b)));
        let mut left = empty.clone();
        let mut set = vec![false; n_levels];
        for &l in &ordered[..ordered.len() - 1] {
            left = merge(&left, std::iter::once(&per_level[l]));
            set[l] = true;
            if let Some(g) = gain_of(&left) {
                consider(g, set.clone());
            }
        }
    }

    best.map(|(gain, set)| Candidate {
        feature: f,
        rule: SplitRule::Levels(set),
        gain,
    })
}

fn merge<'a>(base: &GroupStats, groups: impl Iterator<Item = &'a GroupStats>) -> GroupStats {
    let mut out = base.clone();
    for g in groups {
        out.n += g.n;
        out.sum += g.sum;
        for (o, c) in out.counts.iter_mut().zip(&g.counts) {
            *o += c;
        }
    }
    out
}

/// Impurity of a group up to a constant shared by all groups of the node
/// (numeric: `-sum^2 / n` of centered targets).
fn group_impurity(g: &GroupStats, y: &Target) -> f64 {
    if g.n == 0 {
        return 0.0;
    }
    match y {
        Target::Numeric(_) => -g.sum * g.sum / g.n as f64,
        Target::Categorical { .. } => gini_weighted(&g.counts, g.n),
    }
}
