//! Graphons, scalar initial data, and 1-D partitions.
//!
//! Kernels and fields come from a closed enumeration of families so that
//! symmetry and boundedness can be validated at construction and so that cell
//! averages and projection errors have exact closed forms.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Index of the half-open cell `]b_{i-1}, b_i]` containing `x`.
///
/// `x = 0` is assigned to the first cell by convention.
fn cell_of(breaks: &[f64], x: f64) -> usize {
    let k = breaks.partition_point(|&b| b < x);
    k.saturating_sub(1).min(breaks.len().saturating_sub(2))
}

/// Same convention on the uniform grid with `m` cells.
fn uniform_cell_of(m: usize, x: f64) -> usize {
    let k = (x * m as f64).ceil() as isize - 1;
    k.clamp(0, m as isize - 1) as usize
}

fn validate_breakpoints(breaks: &[f64]) -> Result<()> {
    if breaks.len() < 2 {
        return Err(Error::invalid("need at least two breakpoints"));
    }
    if breaks[0] != 0.0 || *breaks.last().unwrap() != 1.0 {
        return Err(Error::invalid("breakpoints must start at 0 and end at 1"));
    }
    for w in breaks.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::invalid(format!(
                "breakpoints must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Partition1D
// ---------------------------------------------------------------------------

/// Partition of `[0,1]` into half-open cells `]b_{i-1}, b_i]` of positive measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition1D {
    breaks: Vec<f64>,
}

impl Partition1D {
    pub fn from_breakpoints(breaks: Vec<f64>) -> Result<Self> {
        validate_breakpoints(&breaks)?;
        Ok(Self { breaks })
    }

    /// Uniform partition with `n` cells.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("partition needs at least one cell"));
        }
        let breaks = (0..=n).map(|i| i as f64 / n as f64).collect();
        Ok(Self { breaks })
    }

    pub fn n_cells(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    /// Closed-open bounds of cell `i` (0-based): `(b_i, b_{i+1})`.
    pub fn cell(&self, i: usize) -> (f64, f64) {
        (self.breaks[i], self.breaks[i + 1])
    }

    pub fn width(&self, i: usize) -> f64 {
        self.breaks[i + 1] - self.breaks[i]
    }

    /// Maximal cell width (the mesh size).
    pub fn mesh(&self) -> f64 {
        self.breaks
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// 0-based index of the cell containing `x` (with `x = 0` in cell 0).
    pub fn cell_index(&self, x: f64) -> usize {
        cell_of(&self.breaks, x)
    }

    /// Merge of the breakpoints of both partitions (exact duplicates removed).
    pub fn common_refinement(&self, other: &Partition1D) -> Partition1D {
        let mut merged: Vec<f64> = self
            .breaks
            .iter()
            .chain(other.breaks.iter())
            .copied()
            .collect();
        merged.sort_by(|a, b| a.partial_cmp(b).unwrap());
        merged.dedup();
        Partition1D { breaks: merged }
    }
}

// ---------------------------------------------------------------------------
// Graphon
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum GraphonKind {
    /// `K(x, y) = c`
    Constant(f64),
    /// `K(x, y) = a * x * y`
    Product { coeff: f64 },
    /// Piecewise constant on blocks induced by shared breakpoints.
    BlockModel { breaks: Vec<f64>, values: Vec<Vec<f64>> },
    /// Piecewise constant on the uniform m x m grid (a cell-average table).
    SampledGrid { m: usize, values: Vec<f64> },
}

/// Symmetric nonnegative bounded kernel on `[0,1]^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graphon {
    kind: GraphonKind,
    bound: f64,
}

impl Graphon {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::invalid("constant graphon needs a finite c >= 0"));
        }
        Ok(Self { kind: GraphonKind::Constant(c), bound: c })
    }

    pub fn product(coeff: f64) -> Result<Self> {
        if !(coeff.is_finite() && coeff >= 0.0) {
            return Err(Error::invalid("product graphon needs a finite coeff >= 0"));
        }
        Ok(Self { kind: GraphonKind::Product { coeff }, bound: coeff })
    }

    pub fn block_model(breaks: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        validate_breakpoints(&breaks)?;
        let m = breaks.len() - 1;
        if values.len() != m || values.iter().any(|row| row.len() != m) {
            return Err(Error::invalid("block value matrix must be m x m"));
        }
        let mut bound = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let v = values[i][j];
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::invalid("block values must be finite and >= 0"));
                }
                if v != values[j][i] {
                    return Err(Error::invalid("block value matrix must be symmetric"));
                }
                bound = bound.max(v);
            }
        }
        Ok(Self { kind: GraphonKind::BlockModel { breaks, values }, bound })
    }

    pub fn sampled_grid(values: Vec<Vec<f64>>) -> Result<Self> {
        let m = values.len();
        if m == 0 || values.iter().any(|row| row.len() != m) {
            return Err(Error::invalid("grid table must be square and nonempty"));
        }
        let mut bound = 0.0f64;
        let mut flat = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let v = values[i][j];
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::invalid("grid values must be finite and >= 0"));
                }
                if v != values[j][i] {
                    return Err(Error::invalid("grid table must be symmetric"));
                }
                bound = bound.max(v);
                flat.push(v);
            }
        }
        Ok(Self { kind: GraphonKind::SampledGrid { m, values: flat }, bound })
    }

    /// Parse a whitespace/comma-separated square table into a sampled-grid graphon.
    pub fn grid_from_table_str(text: &str) -> Result<Self> {
        let values = parse_table(text)?;
        Self::sampled_grid(values)
    }

    pub fn kind(&self) -> &GraphonKind {
        &self.kind
    }

    /// Upper bound `K_max` on the kernel values.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn is_constant(&self) -> Option<f64> {
        match self.kind {
            GraphonKind::Constant(c) => Some(c),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match &self.kind {
            GraphonKind::Constant(c) => *c,
            GraphonKind::Product { coeff } => coeff * x * y,
            GraphonKind::BlockModel { breaks, values } => {
                values[cell_of(breaks, x)][cell_of(breaks, y)]
            }
            GraphonKind::SampledGrid { m, values } => {
                values[uniform_cell_of(*m, x) * m + uniform_cell_of(*m, y)]
            }
        }
    }

    /// Breakpoints at which the kernel may jump along either axis.
    fn axis_breaks(&self) -> Vec<f64> {
        match &self.kind {
            GraphonKind::Constant(_) | GraphonKind::Product { .. } => vec![0.0, 1.0],
            GraphonKind::BlockModel { breaks, .. } => breaks.clone(),
            GraphonKind::SampledGrid { m, .. } => {
                (0..=*m).map(|i| i as f64 / *m as f64).collect()
            }
        }
    }
}

/// Axis-aligned rectangle inside `[0,1]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    fn validate(&self) -> Result<()> {
        let inside = self.x0 >= 0.0 && self.y0 >= 0.0 && self.x1 <= 1.0 && self.y1 <= 1.0;
        if !inside {
            return Err(Error::invalid("cell must lie inside [0,1]^2"));
        }
        if !(self.x1 > self.x0 && self.y1 > self.y0) {
            return Err(Error::invalid("cell must have positive area"));
        }
        Ok(())
    }
}

/// Average of the kernel over a rectangle, `(1/|cell|) * double integral`.
///
/// Exact for every family in the closed enumeration: constant and product
/// kernels integrate in closed form, block and grid kernels by splitting the
/// rectangle at the kernel's own breakpoints.
pub fn cell_average(k: &Graphon, cell: Rect) -> Result<f64> {
    cell.validate()?;
    Ok(match &k.kind {
        GraphonKind::Constant(c) => *c,
        GraphonKind::Product { coeff } => {
            coeff * 0.5 * (cell.x0 + cell.x1) * 0.5 * (cell.y0 + cell.y1)
        }
        GraphonKind::BlockModel { breaks, values } => {
            piecewise_rect_integral(breaks, |i, j| values[i][j], cell) / cell.area()
        }
        GraphonKind::SampledGrid { m, values } => {
            let breaks: Vec<f64> = (0..=*m).map(|i| i as f64 / *m as f64).collect();
            piecewise_rect_integral(&breaks, |i, j| values[i * m + j], cell) / cell.area()
        }
    })
}

/// Integral over `cell` of a kernel that is constant on the blocks of `breaks x breaks`.
fn piecewise_rect_integral(breaks: &[f64], value: impl Fn(usize, usize) -> f64, cell: Rect) -> f64 {
    let xs = cell_overlaps(breaks, cell.x0, cell.x1);
    let ys = cell_overlaps(breaks, cell.y0, cell.y1);
    let mut total = 0.0;
    for &(i, wx) in &xs {
        for &(j, wy) in &ys {
            total += value(i, j) * wx * wy;
        }
    }
    total
}

/// Overlap widths of `[a, b]` with each cell of `breaks`, as `(cell index, width)`.
pub(crate) fn cell_overlaps(breaks: &[f64], a: f64, b: f64) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for i in 0..breaks.len() - 1 {
        let lo = breaks[i].max(a);
        let hi = breaks[i + 1].min(b);
        if hi > lo {
            out.push((i, hi - lo));
        }
    }
    out
}

/// Matrix of unclamped cell averages `K_nij` over the partition cells.
pub fn cell_average_matrix(k: &Graphon, p: &Partition1D) -> Result<Array2<f64>> {
    let n = p.n_cells();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        let (x0, x1) = p.cell(i);
        for j in i..n {
            let (y0, y1) = p.cell(j);
            let v = cell_average(k, Rect::new(x0, x1, y0, y1))?;
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

/// Projected weights `K_hat_ij = min(cell average over cell_i x cell_j, 1/q_n)`.
///
/// The result is bitwise symmetric with entries in `[0, 1/q_n]`.
pub fn project_graphon(k: &Graphon, p: &Partition1D, q_n: f64) -> Result<Array2<f64>> {
    if !(q_n > 0.0) {
        return Err(Error::invalid("q_n must be positive"));
    }
    let cap = 1.0 / q_n;
    let mut m = cell_average_matrix(k, p)?;
    m.mapv_inplace(|v| v.min(cap));
    Ok(m)
}

// ---------------------------------------------------------------------------
// ScalarField
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarFieldKind {
    Constant(f64),
    /// `g(x) = intercept + slope * x`
    Affine { intercept: f64, slope: f64 },
    /// Piecewise constant with the same half-open cell convention as partitions.
    Step { breaks: Vec<f64>, values: Vec<f64> },
    /// Piecewise constant on the uniform grid with `values.len()` cells.
    SampledGrid { values: Vec<f64> },
}

/// Bounded scalar initial datum on `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    kind: ScalarFieldKind,
    bound: f64,
}

impl ScalarField {
    pub fn constant(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::invalid("constant field value must be finite"));
        }
        Ok(Self { kind: ScalarFieldKind::Constant(c), bound: c.abs() })
    }

    pub fn affine(intercept: f64, slope: f64) -> Result<Self> {
        if !(intercept.is_finite() && slope.is_finite()) {
            return Err(Error::invalid("affine field parameters must be finite"));
        }
        let bound = intercept.abs().max((intercept + slope).abs());
        Ok(Self { kind: ScalarFieldKind::Affine { intercept, slope }, bound })
    }

    pub fn step(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        validate_breakpoints(&breaks)?;
        if values.len() != breaks.len() - 1 {
            return Err(Error::invalid("step field needs one value per cell"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("step values must be finite"));
        }
        let bound = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self { kind: ScalarFieldKind::Step { breaks, values }, bound })
    }

    pub fn sampled_grid(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("grid field needs finite values"));
        }
        let bound = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self { kind: ScalarFieldKind::SampledGrid { values }, bound })
    }

    /// Parse a whitespace/comma-separated list of values into a grid field.
    pub fn grid_from_table_str(text: &str) -> Result<Self> {
        let rows = parse_table(text)?;
        Self::sampled_grid(rows.into_iter().flatten().collect())
    }

    pub fn kind(&self) -> &ScalarFieldKind {
        &self.kind
    }

    /// Upper bound `g_max` on `|g|`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            ScalarFieldKind::Constant(c) => *c,
            ScalarFieldKind::Affine { intercept, slope } => intercept + slope * x,
            ScalarFieldKind::Step { breaks, values } => values[cell_of(breaks, x)],
            ScalarFieldKind::SampledGrid { values } => {
                values[uniform_cell_of(values.len(), x)]
            }
        }
    }

    /// Exact mean over `[0,1]`.
    pub fn mean(&self) -> f64 {
        match &self.kind {
            ScalarFieldKind::Constant(c) => *c,
            ScalarFieldKind::Affine { intercept, slope } => intercept + 0.5 * slope,
            ScalarFieldKind::Step { breaks, values } => values
                .iter()
                .zip(breaks.windows(2))
                .map(|(v, w)| v * (w[1] - w[0]))
                .sum(),
            ScalarFieldKind::SampledGrid { values } => {
                values.iter().sum::<f64>() / values.len() as f64
            }
        }
    }

    /// The field `x -> shift + scale * g(x)`; stays within the enumeration.
    pub fn scale_shift(&self, shift: f64, scale: f64) -> ScalarField {
        let kind = match &self.kind {
            ScalarFieldKind::Constant(c) => ScalarFieldKind::Constant(shift + scale * c),
            ScalarFieldKind::Affine { intercept, slope } => ScalarFieldKind::Affine {
                intercept: shift + scale * intercept,
                slope: scale * slope,
            },
            ScalarFieldKind::Step { breaks, values } => ScalarFieldKind::Step {
                breaks: breaks.clone(),
                values: values.iter().map(|v| shift + scale * v).collect(),
            },
            ScalarFieldKind::SampledGrid { values } => ScalarFieldKind::SampledGrid {
                values: values.iter().map(|v| shift + scale * v).collect(),
            },
        };
        let bound = match &kind {
            ScalarFieldKind::Constant(c) => c.abs(),
            ScalarFieldKind::Affine { intercept, slope } => {
                intercept.abs().max((intercept + slope).abs())
            }
            ScalarFieldKind::Step { values, .. } | ScalarFieldKind::SampledGrid { values } => {
                values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            }
        };
        ScalarField { kind, bound }
    }

    /// Restriction pieces of the field over `[a, b]`.
    fn pieces_in(&self, a: f64, b: f64) -> Vec<(f64, f64, Piece)> {
        match &self.kind {
            ScalarFieldKind::Constant(c) => vec![(a, b, Piece::Const(*c))],
            ScalarFieldKind::Affine { intercept, slope } => {
                vec![(a, b, Piece::Affine { intercept: *intercept, slope: *slope })]
            }
            ScalarFieldKind::Step { breaks, values } => cell_overlaps(breaks, a, b)
                .into_iter()
                .scan(a, |left, (i, w)| {
                    let piece = (*left, *left + w, Piece::Const(values[i]));
                    *left += w;
                    Some(piece)
                })
                .collect(),
            ScalarFieldKind::SampledGrid { values } => {
                let m = values.len();
                let breaks: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
                cell_overlaps(&breaks, a, b)
                    .into_iter()
                    .scan(a, |left, (i, w)| {
                        let piece = (*left, *left + w, Piece::Const(values[i]));
                        *left += w;
                        Some(piece)
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Piece {
    Const(f64),
    Affine { intercept: f64, slope: f64 },
}

fn parse_table(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Result<Vec<f64>> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>().map_err(|_| {
                    Error::invalid(format!("bad number `{t}` on table line {}", lineno + 1))
                })
            })
            .collect();
        rows.push(row?);
    }
    if rows.is_empty() {
        return Err(Error::invalid("empty grid table"));
    }
    Ok(rows)
}

/// Cell averages of the field over the partition cells.
pub fn project_field(g: &ScalarField, p: &Partition1D) -> Vec<f64> {
    (0..p.n_cells())
        .map(|i| {
            let (a, b) = p.cell(i);
            let integral: f64 = g
                .pieces_in(a, b)
                .iter()
                .map(|(l, r, piece)| match piece {
                    Piece::Const(v) => v * (r - l),
                    Piece::Affine { intercept, slope } => {
                        (intercept + slope * 0.5 * (l + r)) * (r - l)
                    }
                })
                .sum();
            integral / (b - a)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Exact L^p distances between a field and piecewise-constant cell values
// ---------------------------------------------------------------------------

/// `integral over [l, r] of |intercept + slope*x|^p dx`, exact.
///
/// Uses the antiderivative `|u|^p u / (p+1)` of `|u|^p`, which handles sign
/// changes inside the interval.
fn abs_affine_integral(intercept: f64, slope: f64, l: f64, r: f64, p: f64) -> f64 {
    if slope == 0.0 {
        return abs_pow(intercept, p) * (r - l);
    }
    let phi = |u: f64| abs_pow(u, p) * u / (p + 1.0);
    (phi(intercept + slope * r) - phi(intercept + slope * l)) / slope
}

/// Exact `L^p` distance between the field and a piecewise-constant function
/// given by `cell_values` on the partition. `p = inf` gives the sup over the
/// pieces. Requires `p >= 1`.
pub fn field_cellwise_lp_error(
    g: &ScalarField,
    part: &Partition1D,
    cell_values: &[f64],
    p: f64,
) -> Result<f64> {
    if cell_values.len() != part.n_cells() {
        return Err(Error::DimensionMismatch(format!(
            "{} cell values for {} cells",
            cell_values.len(),
            part.n_cells()
        )));
    }
    if !(p >= 1.0) {
        return Err(Error::invalid("p must be >= 1"));
    }
    if p.is_infinite() {
        let mut sup = 0.0f64;
        for i in 0..part.n_cells() {
            let (a, b) = part.cell(i);
            for (l, r, piece) in g.pieces_in(a, b) {
                let local = match piece {
                    Piece::Const(v) => (v - cell_values[i]).abs(),
                    Piece::Affine { intercept, slope } => {
                        let h = intercept - cell_values[i];
                        (h + slope * l).abs().max((h + slope * r).abs())
                    }
                };
                sup = sup.max(local);
            }
        }
        return Ok(sup);
    }
    let mut total = 0.0f64;
    for i in 0..part.n_cells() {
        let (a, b) = part.cell(i);
        for (l, r, piece) in g.pieces_in(a, b) {
            total += match piece {
                Piece::Const(v) => abs_pow(v - cell_values[i], p) * (r - l),
                Piece::Affine { intercept, slope } => {
                    abs_affine_integral(intercept - cell_values[i], slope, l, r, p)
                }
            };
        }
    }
    Ok(total.powf(1.0 / p))
}

/// Exact `L^p` projection error `||g - g_n||_p` for the field's own cell averages.
pub fn field_projection_error(g: &ScalarField, part: &Partition1D, p: f64) -> Result<f64> {
    let values = project_field(g, part);
    field_cellwise_lp_error(g, part, &values, p)
}

/// `L^p` projection error `||K - K_n||_p` of a graphon against its cell
/// averages over `part x part`.
///
/// Exact for piecewise-constant kernels (constant, block, grid) and for the
/// product kernel at `p = 2`; other product exponents fall back to midpoint
/// refinement per cell (diagnostic accuracy, relative tolerance ~1e-8).
pub fn graphon_projection_error(k: &Graphon, part: &Partition1D, p: f64) -> Result<f64> {
    if !(p >= 1.0) || p.is_infinite() {
        return Err(Error::invalid("p must be finite and >= 1"));
    }
    let avg = cell_average_matrix(k, part)?;
    let mut total = 0.0f64;
    match &k.kind {
        GraphonKind::Constant(_) | GraphonKind::BlockModel { .. } | GraphonKind::SampledGrid { .. } => {
            let axis = k.axis_breaks();
            for i in 0..part.n_cells() {
                let (x0, x1) = part.cell(i);
                let xs = cell_overlaps(&axis, x0, x1);
                for j in 0..part.n_cells() {
                    let (y0, y1) = part.cell(j);
                    let ys = cell_overlaps(&axis, y0, y1);
                    let c = avg[(i, j)];
                    for &(bi, wx) in &xs {
                        for &(bj, wy) in &ys {
                            let v = match &k.kind {
                                GraphonKind::Constant(cv) => *cv,
                                GraphonKind::BlockModel { values, .. } => values[bi][bj],
                                GraphonKind::SampledGrid { m, values } => values[bi * m + bj],
                                GraphonKind::Product { .. } => unreachable!(),
                            };
                            total += (v - c).abs().powf(p) * wx * wy;
                        }
                    }
                }
            }
        }
        GraphonKind::Product { coeff } => {
            for i in 0..part.n_cells() {
                let (x0, x1) = part.cell(i);
                for j in 0..part.n_cells() {
                    let (y0, y1) = part.cell(j);
                    let c = avg[(i, j)];
                    if p == 2.0 {
                        // expand (a x y - c)^2 and integrate term by term
                        let m1 = |l: f64, r: f64| 0.5 * (r * r - l * l);
                        let m2 = |l: f64, r: f64| (r * r * r - l * l * l) / 3.0;
                        let area = (x1 - x0) * (y1 - y0);
                        total += coeff * coeff * m2(x0, x1) * m2(y0, y1)
                            - 2.0 * coeff * c * m1(x0, x1) * m1(y0, y1)
                            + c * c * area;
                    } else {
                        total += midpoint_abs_power(
                            |x, y| coeff * x * y - c,
                            Rect::new(x0, x1, y0, y1),
                            p,
                        );
                    }
                }
            }
        }
    }
    Ok(total.max(0.0).powf(1.0 / p))
}

/// Midpoint refinement of `integral |f|^p` over a rectangle, refined until the
/// relative change drops below 1e-8 (depth-capped).
fn midpoint_abs_power(f: impl Fn(f64, f64) -> f64, cell: Rect, p: f64) -> f64 {
    let mut prev = f64::NAN;
    for level in 0..=9u32 {
        let m = 1usize << level;
        let dx = (cell.x1 - cell.x0) / m as f64;
        let dy = (cell.y1 - cell.y0) / m as f64;
        let mut sum = 0.0;
        for i in 0..m {
            let x = cell.x0 + (i as f64 + 0.5) * dx;
            for j in 0..m {
                let y = cell.y0 + (j as f64 + 0.5) * dy;
                sum += f(x, y).abs().powf(p);
            }
        }
        let est = sum * dx * dy;
        if prev.is_finite() && (est - prev).abs() <= 1e-8 * est.abs().max(1e-300) {
            return est;
        }
        prev = est;
    }
    prev
}

// ---------------------------------------------------------------------------
// Modulus of smoothness and Lipschitz seminorm estimates
// ---------------------------------------------------------------------------

/// Smoothness quantities shared by 1-D fields and 2-D kernels.
///
/// Both estimators sample a finite shift lattice on a fine evaluation grid and
/// are therefore lower bounds of the true supremum; tests use them
/// directionally.
pub trait Smoothness {
    /// Estimate of the first-order modulus `omega(F, h)_q`.
    fn modulus_of_smoothness(&self, h: f64, q: f64) -> Result<f64>;

    /// `max over h_set of h^{-s} * omega(F, h)_q`, a lower bound on the
    /// `Lip(s, L^q)` seminorm.
    fn lip_seminorm_estimate(&self, s: f64, q: f64, h_set: &[f64]) -> Result<f64> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::invalid("s must be in ]0,1]"));
        }
        if h_set.is_empty() {
            return Err(Error::invalid("h_set must be nonempty"));
        }
        let mut best = 0.0f64;
        for &h in h_set {
            best = best.max(h.powf(-s) * self.modulus_of_smoothness(h, q)?);
        }
        Ok(best)
    }
}

fn validate_modulus_args(h: f64, q: f64) -> Result<()> {
    if !(h > 0.0) {
        return Err(Error::invalid("h must be positive"));
    }
    if !(q >= 1.0) {
        return Err(Error::invalid("q must be >= 1"));
    }
    Ok(())
}

impl Smoothness for ScalarField {
    fn modulus_of_smoothness(&self, h: f64, q: f64) -> Result<f64> {
        validate_modulus_args(h, q)?;
        // Fine grid of at least 2^12 midpoints, refined until at least 64
        // grid-aligned shifts fit strictly below h.
        let mut n = 1usize << 12;
        while ((h * n as f64).ceil() as usize).saturating_sub(1) < 64 && n < (1 << 20) {
            n <<= 1;
        }
        let jmax = ((h * n as f64).ceil() as usize)
            .saturating_sub(1)
            .min(n - 1);
        if jmax == 0 {
            return Ok(0.0);
        }
        let vals: Vec<f64> = (0..n)
            .map(|i| self.eval((i as f64 + 0.5) / n as f64))
            .collect();
        // Cap the number of shifts; always include the largest one, which
        // dominates for monotone difference profiles.
        let stride = (jmax / 512).max(1);
        let mut best = 0.0f64;
        let mut j = stride;
        loop {
            let shifted = &vals[j..];
            let base = &vals[..n - j];
            let norm = if q.is_infinite() {
                shifted
                    .iter()
                    .zip(base)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            } else {
                let sum: f64 = shifted
                    .iter()
                    .zip(base)
                    .map(|(a, b)| abs_pow(a - b, q))
                    .sum();
                (sum / n as f64).powf(1.0 / q)
            };
            best = best.max(norm);
            if j == jmax {
                break;
            }
            j = (j + stride).min(jmax);
        }
        Ok(best)
    }
}

impl Smoothness for Graphon {
    fn modulus_of_smoothness(&self, h: f64, q: f64) -> Result<f64> {
        validate_modulus_args(h, q)?;
        // 2^7 x 2^7 cells by default, refined until the half-plane lattice of
        // grid-aligned shifts below h holds at least 64 samples.
        let mut n = 1usize << 7;
        while grid_shifts(h, n).len() < 64 && n < (1 << 11) {
            n <<= 1;
        }
        let shifts = {
            let s = grid_shifts(h, n);
            if s.len() >= 64 {
                s
            } else {
                polar_shifts(h)
            }
        };
        if shifts.is_empty() {
            return Ok(0.0);
        }
        let step = 1.0 / n as f64;
        let vals: Vec<f64> = (0..n * n)
            .map(|idx| {
                let i = idx / n;
                let j = idx % n;
                self.eval((i as f64 + 0.5) * step, (j as f64 + 0.5) * step)
            })
            .collect();
        let mut best = 0.0f64;
        for &(z1, z2) in &shifts {
            let norm = shifted_norm_2d(self, &vals, n, z1, z2, q);
            best = best.max(norm);
        }
        Ok(best)
    }
}

/// Half-plane lattice `(j1, j2)/n` with `0 < |z| < h`.
fn grid_shifts(h: f64, n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let jlim = (h * n as f64).ceil() as i64;
    for j1 in 0..=jlim {
        let j2_range: Box<dyn Iterator<Item = i64>> = if j1 == 0 {
            Box::new(1..=jlim)
        } else {
            Box::new(-jlim..=jlim)
        };
        for j2 in j2_range {
            let z1 = j1 as f64 / n as f64;
            let z2 = j2 as f64 / n as f64;
            if z1 * z1 + z2 * z2 > 0.0 && (z1 * z1 + z2 * z2).sqrt() < h {
                out.push((z1, z2));
            }
        }
    }
    out
}

/// 16 directions x 4 radii strictly inside the disc of radius h.
fn polar_shifts(h: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(64);
    for d in 0..16 {
        let theta = std::f64::consts::PI * d as f64 / 16.0;
        for r in 0..4 {
            let radius = h * (2 * r + 1) as f64 / 8.0;
            out.push((radius * theta.cos(), radius * theta.sin()));
        }
    }
    out
}

fn shifted_norm_2d(k: &Graphon, vals: &[f64], n: usize, z1: f64, z2: f64, q: f64) -> f64 {
    let step = 1.0 / n as f64;
    let aligned_1 = (z1 / step).round();
    let aligned_2 = (z2 / step).round();
    let grid_aligned = (z1 - aligned_1 * step).abs() < 1e-12 && (z2 - aligned_2 * step).abs() < 1e-12;
    let mut count = 0usize;
    let mut sum = 0.0f64;
    let mut sup = 0.0f64;
    if grid_aligned {
        let (j1, j2) = (aligned_1 as i64, aligned_2 as i64);
        for i1 in 0..n as i64 {
            let s1 = i1 + j1;
            if s1 < 0 || s1 >= n as i64 {
                continue;
            }
            for i2 in 0..n as i64 {
                let s2 = i2 + j2;
                if s2 < 0 || s2 >= n as i64 {
                    continue;
                }
                let d = vals[(s1 as usize) * n + s2 as usize] - vals[(i1 as usize) * n + i2 as usize];
                if q.is_infinite() {
                    sup = sup.max(d.abs());
                } else {
                    sum += abs_pow(d, q);
                }
                count += 1;
            }
        }
    } else {
        for i1 in 0..n {
            let x = (i1 as f64 + 0.5) * step;
            let xs = x + z1;
            if !(0.0..=1.0).contains(&xs) {
                continue;
            }
            for i2 in 0..n {
                let y = (i2 as f64 + 0.5) * step;
                let ys = y + z2;
                if !(0.0..=1.0).contains(&ys) {
                    continue;
                }
                let d = k.eval(xs, ys) - vals[i1 * n + i2];
                if q.is_infinite() {
                    sup = sup.max(d.abs());
                } else {
                    sum += abs_pow(d, q);
                }
                count += 1;
            }
        }
    }
    if q.is_infinite() {
        sup
    } else if count == 0 {
        0.0
    } else {
        (sum / (n * n) as f64).powf(1.0 / q)
    }
}

pub(crate) fn abs_pow(x: f64, q: f64) -> f64 {
    if q == 1.0 {
        x.abs()
    } else if q == 2.0 {
        x * x
    } else {
        x.abs().powf(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: nested tensor-product midpoint quadrature for cell
    /// averages. A minimum depth keeps discontinuous kernels from stalling the
    /// convergence check on accidentally equal coarse estimates.
    fn cell_average_quadrature(k: &Graphon, cell: Rect) -> f64 {
        let mut prev = f64::NAN;
        for level in 0..=11u32 {
            let m = 1usize << level;
            let dx = (cell.x1 - cell.x0) / m as f64;
            let dy = (cell.y1 - cell.y0) / m as f64;
            let mut sum = 0.0;
            for i in 0..m {
                let x = cell.x0 + (i as f64 + 0.5) * dx;
                for j in 0..m {
                    let y = cell.y0 + (j as f64 + 0.5) * dy;
                    sum += k.eval(x, y);
                }
            }
            let est = sum / (m * m) as f64;
            if level >= 5
                && prev.is_finite()
                && (est - prev).abs() <= 1e-10 * est.abs().max(1e-30)
            {
                return est;
            }
            prev = est;
        }
        prev
    }

    fn field_average_quadrature(g: &ScalarField, a: f64, b: f64) -> f64 {
        let m = 1usize << 16;
        let dx = (b - a) / m as f64;
        let sum: f64 = (0..m).map(|i| g.eval(a + (i as f64 + 0.5) * dx)).sum();
        sum / m as f64
    }

    #[test]
    fn cell_average_constant_kernel() {
        let k = Graphon::constant(0.7).unwrap();
        let v = cell_average(&k, Rect::new(0.1, 0.4, 0.55, 0.8)).unwrap();
        assert_eq!(v, 0.7);
    }

    #[test]
    fn cell_average_aligned_block() {
        let k = Graphon::block_model(
            vec![0.0, 0.5, 1.0],
            vec![vec![2.0, 0.5], vec![0.5, 3.0]],
        )
        .unwrap();
        let v = cell_average(&k, Rect::new(0.1, 0.3, 0.05, 0.45)).unwrap();
        assert_eq!(v, 2.0);
        let v = cell_average(&k, Rect::new(0.6, 0.9, 0.1, 0.4)).unwrap();
        assert_eq!(v, 0.5);
    }

    #[test]
    fn cell_average_product_closed_form() {
        // average of 4xy over [0, 1/2]^2 = 4 * (1/8)^2 / (1/4) = 0.25
        let k = Graphon::product(4.0).unwrap();
        let v = cell_average(&k, Rect::new(0.0, 0.5, 0.0, 0.5)).unwrap();
        assert!((v - 0.25).abs() < 1e-15, "v = {v}");
    }

    #[test]
    fn cell_average_matches_quadrature_oracle() {
        // midpoint quadrature is a valid independent oracle for the
        // continuous families; block jumps stall its convergence check
        let kernels = vec![
            Graphon::product(4.0).unwrap(),
            Graphon::constant(1.3).unwrap(),
        ];
        let cells = [
            Rect::new(0.0, 0.5, 0.0, 0.5),
            Rect::new(0.2, 0.9, 0.1, 0.3),
            Rect::new(0.25, 1.0, 0.0, 0.25),
        ];
        for k in &kernels {
            for &cell in &cells {
                let exact = cell_average(k, cell).unwrap();
                let quad = cell_average_quadrature(k, cell);
                assert!(
                    (exact - quad).abs() <= 1e-8 * exact.abs().max(1.0),
                    "exact {exact} vs quadrature {quad}"
                );
            }
        }
    }

    #[test]
    fn cell_average_block_overlap_arithmetic() {
        // hand-computed interval intersections for an unaligned cell:
        // x-overlaps (0.05, 0.65), y-overlaps (0.15, 0.05) against blocks
        // [[1.0, 0.2], [0.2, 0.6]] give integral 0.047 over area 0.14
        let k = Graphon::block_model(vec![0.0, 0.25, 1.0], vec![vec![1.0, 0.2], vec![0.2, 0.6]])
            .unwrap();
        let v = cell_average(&k, Rect::new(0.2, 0.9, 0.1, 0.3)).unwrap();
        assert!((v - 0.047 / 0.14).abs() < 1e-15, "v = {v}");
    }

    #[test]
    fn cell_average_rejects_degenerate_cell() {
        let k = Graphon::constant(1.0).unwrap();
        assert!(cell_average(&k, Rect::new(0.3, 0.3, 0.0, 1.0)).is_err());
        assert!(cell_average(&k, Rect::new(0.0, 0.5, -0.1, 0.5)).is_err());
    }

    #[test]
    fn project_graphon_constant_and_clamp() {
        let p = Partition1D::uniform(3).unwrap();
        let k = Graphon::constant(1.0).unwrap();
        let m = project_graphon(&k, &p, 1.0).unwrap();
        assert!(m.iter().all(|&v| v == 1.0));

        let k3 = Graphon::constant(3.0).unwrap();
        let m3 = project_graphon(&k3, &p, 1.0).unwrap();
        assert!(m3.iter().all(|&v| v == 1.0), "entries clamp to 1/q_n");
    }

    #[test]
    fn project_graphon_product_two_cells() {
        let p = Partition1D::uniform(2).unwrap();
        let k = Graphon::product(4.0).unwrap();
        let m = project_graphon(&k, &p, 1.0).unwrap();
        let expected = [[0.25, 0.75], [0.75, 1.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (m[(i, j)] - expected[i][j]).abs() < 1e-15,
                    "entry ({i},{j}) = {}",
                    m[(i, j)]
                );
            }
        }
    }

    #[test]
    fn project_field_examples() {
        let p = Partition1D::uniform(2).unwrap();
        let g = ScalarField::constant(2.5).unwrap();
        assert_eq!(project_field(&g, &p), vec![2.5, 2.5]);

        let id = ScalarField::affine(0.0, 1.0).unwrap();
        let v = project_field(&id, &p);
        assert!((v[0] - 0.25).abs() < 1e-15 && (v[1] - 0.75).abs() < 1e-15);

        let step = ScalarField::step(vec![0.0, 0.5, 1.0], vec![0.0, 1.0]).unwrap();
        let p4 = Partition1D::uniform(4).unwrap();
        assert_eq!(project_field(&step, &p4), vec![0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn project_field_matches_quadrature_oracle() {
        let p = Partition1D::from_breakpoints(vec![0.0, 0.3, 0.55, 1.0]).unwrap();
        let fields = vec![
            ScalarField::affine(-0.5, 2.0).unwrap(),
            ScalarField::step(vec![0.0, 1.0 / 3.0, 1.0], vec![1.0, -1.0]).unwrap(),
            ScalarField::sampled_grid(vec![0.1, 0.4, 0.9, 0.2]).unwrap(),
        ];
        for g in &fields {
            let proj = project_field(g, &p);
            for i in 0..p.n_cells() {
                let (a, b) = p.cell(i);
                let quad = field_average_quadrature(g, a, b);
                assert!(
                    (proj[i] - quad).abs() < 1e-4,
                    "cell {i}: exact {} vs quadrature {quad}",
                    proj[i]
                );
            }
        }
    }

    #[test]
    fn refinement_consistency_of_projection() {
        // project on a refinement and re-average back onto the coarse cells
        let coarse = Partition1D::from_breakpoints(vec![0.0, 0.4, 1.0]).unwrap();
        let fine = Partition1D::from_breakpoints(vec![0.0, 0.2, 0.4, 0.7, 1.0]).unwrap();
        let k = Graphon::product(2.0).unwrap();
        let coarse_avg = cell_average_matrix(&k, &coarse).unwrap();
        let fine_avg = cell_average_matrix(&k, &fine).unwrap();
        // fine cells 0..2 lie in coarse cell 0; 2..4 in coarse cell 1
        let groups: [&[usize]; 2] = [&[0, 1], &[2, 3]];
        for ci in 0..2 {
            for cj in 0..2 {
                let mut num = 0.0;
                let mut den = 0.0;
                for &fi in groups[ci] {
                    for &fj in groups[cj] {
                        let w = fine.width(fi) * fine.width(fj);
                        num += fine_avg[(fi, fj)] * w;
                        den += w;
                    }
                }
                let back = num / den;
                assert!(
                    (back - coarse_avg[(ci, cj)]).abs() < 1e-12,
                    "coarse ({ci},{cj})"
                );
            }
        }
    }

    #[test]
    fn modulus_of_constant_is_zero() {
        let g = ScalarField::constant(3.0).unwrap();
        for &h in &[0.01, 0.1, 0.5] {
            assert_eq!(g.modulus_of_smoothness(h, 1.0).unwrap(), 0.0);
        }
        let k = Graphon::constant(0.5).unwrap();
        assert_eq!(k.modulus_of_smoothness(0.2, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn modulus_of_identity_is_h_in_sup_norm() {
        let g = ScalarField::affine(0.0, 1.0).unwrap();
        for &h in &[0.05, 0.1, 0.3] {
            let w = g.modulus_of_smoothness(h, f64::INFINITY).unwrap();
            assert!((w - h).abs() <= h * 0.02 + 1e-3, "h = {h}, omega = {w}");
        }
    }

    #[test]
    fn modulus_of_step_is_h_in_l1() {
        let g = ScalarField::step(vec![0.0, 0.5, 1.0], vec![0.0, 1.0]).unwrap();
        for &h in &[0.02, 0.05, 0.1] {
            let w = g.modulus_of_smoothness(h, 1.0).unwrap();
            assert!((w - h).abs() <= h * 0.05 + 1e-3, "h = {h}, omega = {w}");
        }
    }

    #[test]
    fn modulus_rejects_bad_arguments() {
        let g = ScalarField::constant(0.0).unwrap();
        assert!(g.modulus_of_smoothness(0.1, 0.5).is_err());
        assert!(g.modulus_of_smoothness(-0.1, 2.0).is_err());
    }

    #[test]
    fn modulus_monotone_in_h() {
        let g = ScalarField::step(vec![0.0, 0.3, 0.8, 1.0], vec![1.0, -0.5, 2.0]).unwrap();
        let hs = [0.01, 0.02, 0.05, 0.1, 0.2, 0.4];
        let mut prev = 0.0;
        for &h in &hs {
            let w = g.modulus_of_smoothness(h, 1.0).unwrap();
            assert!(w >= prev - 1e-3, "omega({h}) = {w} < previous {prev}");
            prev = w;
        }
    }

    #[test]
    fn modulus_subadditive_within_tolerance() {
        let g = ScalarField::step(vec![0.0, 0.4, 1.0], vec![0.0, 1.0]).unwrap();
        let (h1, h2) = (0.05, 0.08);
        let w12 = g.modulus_of_smoothness(h1 + h2, 1.0).unwrap();
        let w1 = g.modulus_of_smoothness(h1, 1.0).unwrap();
        let w2 = g.modulus_of_smoothness(h2, 1.0).unwrap();
        assert!(w12 <= w1 + w2 + 5e-3, "{w12} vs {w1} + {w2}");
    }

    #[test]
    fn lip_seminorm_estimates() {
        let hs = [0.02, 0.05, 0.1, 0.2];
        let c = ScalarField::constant(1.0).unwrap();
        assert_eq!(c.lip_seminorm_estimate(1.0, 1.0, &hs).unwrap(), 0.0);

        let id = ScalarField::affine(0.0, 1.0).unwrap();
        let l = id.lip_seminorm_estimate(1.0, f64::INFINITY, &hs).unwrap();
        assert!((l - 1.0).abs() < 0.05, "identity seminorm {l}");

        let step = ScalarField::step(vec![0.0, 0.5, 1.0], vec![0.0, 1.0]).unwrap();
        let l = step.lip_seminorm_estimate(1.0, 1.0, &hs).unwrap();
        assert!((l - 1.0).abs() < 0.05, "step seminorm {l}");
    }

    #[test]
    fn block_graphon_modulus_scales_linearly_in_l1() {
        let k = Graphon::block_model(
            vec![0.0, 0.5, 1.0],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        let w1 = k.modulus_of_smoothness(0.1, 1.0).unwrap();
        let w2 = k.modulus_of_smoothness(0.2, 1.0).unwrap();
        assert!(w1 > 0.0 && w2 > w1, "w1 = {w1}, w2 = {w2}");
        assert!((w2 / w1 - 2.0).abs() < 0.35, "ratio {}", w2 / w1);
    }

    #[test]
    fn field_projection_error_step_misaligned() {
        // step at 1/3 on a dyadic mesh: the critical cell splits 1/3 : 2/3,
        // so the squared error is width * (1/3)(2/3) = 2 delta / 9
        let g = ScalarField::step(vec![0.0, 1.0 / 3.0, 1.0], vec![0.0, 1.0]).unwrap();
        for k in 3..=8u32 {
            let n = 1usize << k;
            let p = Partition1D::uniform(n).unwrap();
            let err = field_projection_error(&g, &p, 2.0).unwrap();
            let expected = (2.0 / 9.0 / n as f64).sqrt();
            assert!(
                (err - expected).abs() < 1e-12,
                "n = {n}: {err} vs {expected}"
            );
        }
    }

    #[test]
    fn field_projection_error_aligned_step_is_zero() {
        let g = ScalarField::step(vec![0.0, 0.5, 1.0], vec![0.0, 1.0]).unwrap();
        let p = Partition1D::uniform(4).unwrap();
        assert_eq!(field_projection_error(&g, &p, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn lipschitz_projection_rate_on_corpus() {
        // || F - F_n ||_q <= C delta^s: empirical log-log slope at least s - 0.1
        let corpus: Vec<(ScalarField, f64, f64)> = vec![
            (ScalarField::affine(0.3, -1.2).unwrap(), 1.0, 2.0),
            (
                ScalarField::step(vec![0.0, 1.0 / 3.0, 1.0], vec![0.0, 1.0]).unwrap(),
                1.0,
                1.0,
            ),
        ];
        for (g, s, q) in &corpus {
            let mut pts = Vec::new();
            for k in 3..=9u32 {
                let n = 1usize << k;
                let p = Partition1D::uniform(n).unwrap();
                let err = field_projection_error(g, &p, *q).unwrap();
                if err > 0.0 {
                    pts.push(((1.0 / n as f64).ln(), err.ln()));
                }
            }
            assert!(pts.len() >= 3);
            // simple least squares on the log pairs
            let n = pts.len() as f64;
            let sx: f64 = pts.iter().map(|p| p.0).sum();
            let sy: f64 = pts.iter().map(|p| p.1).sum();
            let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
            let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
            let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            assert!(slope >= s - 0.1, "slope {slope} below s - 0.1 = {}", s - 0.1);
        }
    }

    #[test]
    fn graphon_projection_error_block_exact() {
        let k = Graphon::block_model(
            vec![0.0, 1.0 / 3.0, 1.0],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        // aligned partition reproduces the kernel exactly
        let aligned = Partition1D::from_breakpoints(vec![0.0, 1.0 / 3.0, 1.0]).unwrap();
        assert_eq!(graphon_projection_error(&k, &aligned, 2.0).unwrap(), 0.0);
        // misaligned partition leaves a positive error
        let p = Partition1D::uniform(4).unwrap();
        assert!(graphon_projection_error(&k, &p, 2.0).unwrap() > 0.0);
    }

    #[test]
    fn graphon_projection_error_product_p2_matches_fallback() {
        let k = Graphon::product(1.0).unwrap();
        let p = Partition1D::uniform(3).unwrap();
        let exact = graphon_projection_error(&k, &p, 2.0).unwrap();
        // the p = 2.0000001 path goes through midpoint refinement
        let approx = graphon_projection_error(&k, &p, 2.0000001).unwrap();
        assert!((exact - approx).abs() < 1e-5, "{exact} vs {approx}");
    }

    #[test]
    fn partition_cell_index_convention() {
        let p = Partition1D::uniform(4).unwrap();
        assert_eq!(p.cell_index(0.0), 0);
        assert_eq!(p.cell_index(0.25), 0);
        assert_eq!(p.cell_index(0.250001), 1);
        assert_eq!(p.cell_index(1.0), 3);
    }

    #[test]
    fn partition_validation() {
        assert!(Partition1D::from_breakpoints(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(Partition1D::from_breakpoints(vec![0.1, 0.5, 1.0]).is_err());
        assert!(Partition1D::from_breakpoints(vec![0.0, 0.5, 0.9]).is_err());
    }

    #[test]
    fn grid_table_parsing() {
        let k = Graphon::grid_from_table_str("1.0, 0.5\n0.5, 2.0\n").unwrap();
        assert_eq!(k.eval(0.1, 0.9), 0.5);
        assert!(Graphon::grid_from_table_str("1.0 0.5\n0.4 2.0\n").is_err());
        let g = ScalarField::grid_from_table_str("0.5 1.5 -2.0 0.0").unwrap();
        assert_eq!(g.eval(0.4), 1.5);
        assert_eq!(g.bound(), 2.0);
    }
}
