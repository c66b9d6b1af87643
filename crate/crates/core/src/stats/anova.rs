use serde::{Deserialize, Serialize};

use super::chi2::require_factor;
use super::special::f_upper_tail;
use super::{Result, StatsError};
use crate::dataset::Dataset;
use crate::scalar::decimal17;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct AnovaTerm<T> {
    pub name: String,
    #[serde(with = "decimal17")]
    pub sum_sq: T,
    pub dof: usize,
    #[serde(with = "decimal17")]
    pub mean_sq: T,
    #[serde(with = "decimal17")]
    pub f: T,
    /// `Pr(> F)`.
    #[serde(with = "decimal17")]
    pub p: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct AnovaResidual<T> {
    #[serde(with = "decimal17")]
    pub sum_sq: T,
    pub dof: usize,
    #[serde(with = "decimal17")]
    pub mean_sq: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct AnovaTable<T> {
    pub response: String,
    pub terms: Vec<AnovaTerm<T>>,
    pub residual: AnovaResidual<T>,
    /// Sum of squares about the grand mean.
    #[serde(with = "decimal17")]
    pub total_sum_sq: T,
    pub n: usize,
}

fn term<T: Scalar>(name: &str, sum_sq: T, dof: usize, residual: &AnovaResidual<T>) -> Result<AnovaTerm<T>> {
    let mean_sq = sum_sq / T::from_usize_lossy(dof);
    // clamp tiny negative differences of nearly equal SSEs
    let mean_sq = mean_sq.max(T::zero());
    let (f, p) = if residual.mean_sq > T::zero() {
        let f = mean_sq / residual.mean_sq;
        (f, f_upper_tail(f, dof, residual.dof)?)
    } else if mean_sq > T::zero() {
        (T::infinity(), T::zero())
    } else {
        (T::nan(), T::nan())
    };
    Ok(AnovaTerm {
        name: name.to_string(),
        sum_sq: sum_sq.max(T::zero()),
        dof,
        mean_sq,
        f,
        p,
    })
}

/// Rows with a response and every factor present: (y, level codes).
fn complete_rows(ds: &Dataset, response: &str, factors: &[&str]) -> Result<(Vec<f64>, Vec<Vec<usize>>, Vec<usize>)> {
    let y = ds.numeric(response)?;
    let coded: Vec<(Vec<Option<u32>>, Vec<String>)> =
        factors.iter().map(|f| require_factor(ds, f)).collect::<Result<_>>()?;
    let mut ys = Vec::new();
    let mut codes = vec![Vec::new(); factors.len()];
    for (i, &v) in y.iter().enumerate() {
        if v.is_nan() || coded.iter().any(|(c, _)| c[i].is_none()) {
            continue;
        }
        ys.push(v);
        for (k, (c, _)) in coded.iter().enumerate() {
            codes[k].push(c[i].unwrap() as usize);
        }
    }
    // levels actually present, renumbered densely in label order
    let mut n_levels = Vec::with_capacity(factors.len());
    for (k, (_, labels)) in coded.iter().enumerate() {
        let mut present = vec![false; labels.len()];
        for &c in &codes[k] {
            present[c] = true;
        }
        let mut remap = vec![usize::MAX; labels.len()];
        let mut next = 0;
        for (l, p) in present.iter().enumerate() {
            if *p {
                remap[l] = next;
                next += 1;
            }
        }
        for c in &mut codes[k] {
            *c = remap[*c];
        }
        n_levels.push(next);
    }
    Ok((ys, codes, n_levels))
}

fn mean<T: Scalar>(v: impl Iterator<Item = T>) -> T {
    let (s, n) = v.fold((T::zero(), 0usize), |(s, n), x| (s + x, n + 1));
    s / T::from_usize_lossy(n)
}

/// One-way ANOVA of a numeric response across the levels of one factor.
pub fn one_way_anova<T: Scalar>(ds: &Dataset, response: &str, factor: &str) -> Result<AnovaTable<T>> {
    let (y, codes, levels) = complete_rows(ds, response, &[factor])?;
    let k = levels[0];
    let n = y.len();
    if k < 2 {
        return Err(StatsError::TooFewGroups(format!("{factor} has {k} non-empty level(s)")));
    }
    if n <= k {
        return Err(StatsError::ZeroDof(format!("{n} observations in {k} groups leave no residual dof")));
    }
    let y: Vec<T> = y.into_iter().map(T::lit).collect();
    let grand = mean(y.iter().copied());
    let mut sums = vec![T::zero(); k];
    let mut counts = vec![0usize; k];
    for (&v, &g) in y.iter().zip(&codes[0]) {
        sums[g] = sums[g] + v;
        counts[g] += 1;
    }
    let means: Vec<T> = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| s / T::from_usize_lossy(c))
        .collect();
    let ss_between = means
        .iter()
        .zip(&counts)
        .map(|(&m, &c)| T::from_usize_lossy(c) * (m - grand) * (m - grand))
        .fold(T::zero(), |a, b| a + b);
    let ss_within = y
        .iter()
        .zip(&codes[0])
        .map(|(&v, &g)| (v - means[g]) * (v - means[g]))
        .fold(T::zero(), |a, b| a + b);
    let total = y
        .iter()
        .map(|&v| (v - grand) * (v - grand))
        .fold(T::zero(), |a, b| a + b);
    let residual = AnovaResidual {
        sum_sq: ss_within,
        dof: n - k,
        mean_sq: ss_within / T::from_usize_lossy(n - k),
    };
    Ok(AnovaTable {
        response: response.to_string(),
        terms: vec![term(factor, ss_between, k - 1, &residual)?],
        residual,
        total_sum_sq: total,
        n,
    })
}

/// Residual sum of squares of the least-squares fit of `y` on an intercept
/// plus treatment dummies of the given factors (first level as reference).
fn additive_sse<T: Scalar>(y: &[T], factors: &[(&[usize], usize)]) -> Result<T> {
    let p = 1 + factors.iter().map(|(_, k)| k - 1).sum::<usize>();
    let n = y.len();
    let row = |i: usize| {
        let mut x = vec![T::zero(); p];
        x[0] = T::one();
        let mut col = 1;
        for (codes, k) in factors {
            if codes[i] > 0 {
                x[col + codes[i] - 1] = T::one();
            }
            col += k - 1;
        }
        x
    };
    let mut xtx = vec![vec![T::zero(); p]; p];
    let mut xty = vec![T::zero(); p];
    for (i, &yi) in y.iter().enumerate() {
        let x = row(i);
        for a in 0..p {
            if x[a] == T::zero() {
                continue;
            }
            xty[a] = xty[a] + yi;
            for b in 0..p {
                xtx[a][b] = xtx[a][b] + x[a] * x[b];
            }
        }
    }
    let beta = cholesky_solve(xtx, xty)?;
    Ok((0..n)
        .map(|i| {
            let fit = row(i).iter().zip(&beta).fold(T::zero(), |acc, (&x, &b)| acc + x * b);
            (y[i] - fit) * (y[i] - fit)
        })
        .fold(T::zero(), |a, b| a + b))
}

/// Solves `A x = b` for symmetric positive-definite `A`; a pivot that is
/// tiny relative to the largest diagonal entry means a rank-deficient design.
fn cholesky_solve<T: Scalar>(mut a: Vec<Vec<T>>, b: Vec<T>) -> Result<Vec<T>> {
    let p = b.len();
    let scale = (0..p).map(|i| a[i][i]).fold(T::zero(), T::max);
    let tol = scale * T::epsilon() * T::lit(1e3) * T::from_usize_lossy(p);
    for j in 0..p {
        let mut d = a[j][j];
        for k in 0..j {
            d = d - a[j][k] * a[j][k];
        }
        if !(d > tol) {
            return Err(StatsError::Singular(format!(
                "design matrix is rank deficient (pivot {j})"
            )));
        }
        let d = d.sqrt();
        a[j][j] = d;
        for i in j + 1..p {
            let mut s = a[i][j];
            for k in 0..j {
                s = s - a[i][k] * a[j][k];
            }
            a[i][j] = s / d;
        }
    }
    let mut z = vec![T::zero(); p];
    for i in 0..p {
        let mut s = b[i];
        for k in 0..i {
            s = s - a[i][k] * z[k];
        }
        z[i] = s / a[i][i];
    }
    let mut x = vec![T::zero(); p];
    for i in (0..p).rev() {
        let mut s = z[i];
        for k in i + 1..p {
            s = s - a[k][i] * x[k];
        }
        x[i] = s / a[i][i];
    }
    Ok(x)
}

/// Two-way ANOVA without interaction. Each factor's sum of squares is the
/// increase in residual SS when it is dropped from the additive model
/// (Type II), which stays meaningful for unbalanced designs.
pub fn two_way_anova<T: Scalar>(ds: &Dataset, response: &str, factor_a: &str, factor_b: &str) -> Result<AnovaTable<T>> {
    let (y, codes, levels) = complete_rows(ds, response, &[factor_a, factor_b])?;
    for (name, &k) in [factor_a, factor_b].iter().zip(&levels) {
        if k < 2 {
            return Err(StatsError::TooFewGroups(format!("{name} has {k} non-empty level(s)")));
        }
    }
    let n = y.len();
    let p = 1 + (levels[0] - 1) + (levels[1] - 1);
    if n <= p {
        return Err(StatsError::ZeroDof(format!(
            "{n} observations for {p} parameters leave no residual dof"
        )));
    }
    let y: Vec<T> = y.into_iter().map(T::lit).collect();
    let a = (codes[0].as_slice(), levels[0]);
    let b = (codes[1].as_slice(), levels[1]);
    let sse_full = additive_sse(&y, &[a, b])?;
    let sse_without_a = additive_sse(&y, &[b])?;
    let sse_without_b = additive_sse(&y, &[a])?;
    let grand = mean(y.iter().copied());
    let total = y
        .iter()
        .map(|&v| (v - grand) * (v - grand))
        .fold(T::zero(), |acc, x| acc + x);
    let residual = AnovaResidual {
        sum_sq: sse_full,
        dof: n - p,
        mean_sq: sse_full / T::from_usize_lossy(n - p),
    };
    Ok(AnovaTable {
        response: response.to_string(),
        terms: vec![
            term(factor_a, sse_without_a - sse_full, levels[0] - 1, &residual)?,
            term(factor_b, sse_without_b - sse_full, levels[1] - 1, &residual)?,
        ],
        residual,
        total_sum_sq: total,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Column;

    fn one_way(a: &[f64], b: &[f64]) -> Dataset {
        let mut y = a.to_vec();
        y.extend_from_slice(b);
        let g: Vec<&str> = a.iter().map(|_| "A").chain(b.iter().map(|_| "B")).collect();
        Dataset::new(vec![Column::numeric("y", y), Column::labels("g", &g)]).unwrap()
    }

    #[test]
    fn one_way_fixture() {
        // hand computation: means 2 and 5, grand mean 3.5
        let ssb = 3.0 * (2.0f64 - 3.5).powi(2) + 3.0 * (5.0f64 - 3.5).powi(2);
        let ssw = 2.0 + 2.0;
        assert_eq!((ssb, ssw), (13.5, 4.0));
        let t: AnovaTable<f64> = one_way_anova(&one_way(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]), "y", "g").unwrap();
        let a = &t.terms[0];
        assert!((a.sum_sq - 13.5).abs() < 1e-12);
        assert!((t.residual.sum_sq - 4.0).abs() < 1e-12);
        assert!((a.f - 13.5).abs() < 1e-12);
        // F(1,4) is a squared Student t with 4 dof, whose two-sided tail is closed form
        let tt = 13.5f64.sqrt();
        let student_t4_two_sided = 1.0 - tt * (6.0 + tt * tt) / (4.0 + tt * tt).powf(1.5);
        assert!((a.p - student_t4_two_sided).abs() < 1e-10);
        assert!((a.p - 0.0213).abs() < 1e-3);
        assert_eq!((a.dof, t.residual.dof), (1, 4));
    }

    #[test]
    fn identical_means_give_zero_f() {
        let t: AnovaTable<f64> = one_way_anova(&one_way(&[1.0, 3.0], &[0.0, 4.0]), "y", "g").unwrap();
        assert_eq!(t.terms[0].f, 0.0);
        assert_eq!(t.terms[0].p, 1.0);
    }

    #[test]
    fn affine_invariance() {
        let base: AnovaTable<f64> = one_way_anova(&one_way(&[1.0, 2.5, 3.0], &[4.0, 7.0, 6.0, 5.5]), "y", "g").unwrap();
        let shifted: AnovaTable<f64> =
            one_way_anova(&one_way(&[-2.0, -5.0, -6.0], &[-8.0, -14.0, -12.0, -11.0]), "y", "g").unwrap();
        assert!((base.terms[0].f - shifted.terms[0].f).abs() < 1e-9);
        let plus: AnovaTable<f64> =
            one_way_anova(&one_way(&[101.0, 102.5, 103.0], &[104.0, 107.0, 106.0, 105.5]), "y", "g").unwrap();
        assert!((base.terms[0].f - plus.terms[0].f).abs() < 1e-9);
    }

    #[test]
    fn one_way_errors() {
        let ds = one_way(&[1.0, 2.0], &[]);
        assert!(matches!(one_way_anova::<f64>(&ds, "y", "g"), Err(StatsError::TooFewGroups(_))));
        let ds = one_way(&[1.0], &[2.0]);
        assert!(matches!(one_way_anova::<f64>(&ds, "y", "g"), Err(StatsError::ZeroDof(_))));
    }

    fn balanced() -> Dataset {
        Dataset::new(vec![
            Column::numeric("y", vec![1.0, 2.0, 3.0, 5.0]),
            Column::labels("a", &["A1", "A1", "A2", "A2"]),
            Column::labels("b", &["B1", "B2", "B1", "B2"]),
        ])
        .unwrap()
    }

    #[test]
    fn two_way_balanced_fixture() {
        // cell means: SS_A = 4·(1.5 − 2.75)² ... by hand
        let grand = 11.0 / 4.0;
        let ss_a = 2.0 * ((1.5f64 - grand).powi(2) + (4.0f64 - grand).powi(2));
        let ss_b = 2.0 * ((2.0f64 - grand).powi(2) + (3.5f64 - grand).powi(2));
        assert_eq!((ss_a, ss_b), (6.25, 2.25));
        let f1_tail = |f: f64| 1.0 - 2.0 / std::f64::consts::PI * f.sqrt().atan();

        let t: AnovaTable<f64> = two_way_anova(&balanced(), "y", "a", "b").unwrap();
        let (a, b) = (&t.terms[0], &t.terms[1]);
        assert!((a.sum_sq - 6.25).abs() < 1e-12);
        assert!((b.sum_sq - 2.25).abs() < 1e-12);
        assert!((t.residual.sum_sq - 0.25).abs() < 1e-12);
        assert!((a.f - 25.0).abs() < 1e-9 && (b.f - 9.0).abs() < 1e-9);
        assert!((a.p - f1_tail(25.0)).abs() < 1e-10);
        assert!((b.p - f1_tail(9.0)).abs() < 1e-10);
        assert!((a.p - 0.1257).abs() < 1e-3 && (b.p - 0.2048).abs() < 1e-3);
        // balanced: the decomposition is exact
        assert!((a.sum_sq + b.sum_sq + t.residual.sum_sq - t.total_sum_sq).abs() < 1e-12);
    }

    #[test]
    fn two_way_is_row_order_invariant() {
        let ds = Dataset::new(vec![
            Column::numeric("y", vec![1.0, 2.0, 3.0, 5.0, 2.5, 4.5, 0.5]),
            Column::labels("a", &["A1", "A1", "A2", "A2", "A1", "A2", "A1"]),
            Column::labels("b", &["B1", "B2", "B1", "B2", "B2", "B3", "B3"]),
        ])
        .unwrap();
        let t1: AnovaTable<f64> = two_way_anova(&ds, "y", "a", "b").unwrap();
        let t2: AnovaTable<f64> = two_way_anova(&ds.select_rows(&[6, 3, 0, 5, 1, 4, 2]), "y", "a", "b").unwrap();
        for (x, y) in t1.terms.iter().zip(&t2.terms) {
            assert!((x.sum_sq - y.sum_sq).abs() < 1e-10);
            assert!((x.p - y.p).abs() < 1e-10);
        }
    }

    #[test]
    fn two_way_errors() {
        let ds = Dataset::new(vec![
            Column::numeric("y", vec![1.0, 2.0, 3.0, 5.0]),
            Column::labels("a", &["A1", "A1", "A2", "A2"]),
            Column::labels("b", &["B", "B", "B", "B"]),
        ])
        .unwrap();
        assert!(matches!(two_way_anova::<f64>(&ds, "y", "a", "b"), Err(StatsError::TooFewGroups(_))));
        // b duplicates a: perfectly confounded
        let ds = Dataset::new(vec![
            Column::numeric("y", vec![1.0, 2.0, 3.0, 5.0, 4.0]),
            Column::labels("a", &["A1", "A1", "A2", "A2", "A2"]),
            Column::labels("b", &["B1", "B1", "B2", "B2", "B2"]),
        ])
        .unwrap();
        assert!(matches!(two_way_anova::<f64>(&ds, "y", "a", "b"), Err(StatsError::Singular(_))));
    }
}
