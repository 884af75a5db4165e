//! Dense complex tensors of order 3 and 4 with the mode-`n` unfolding layout
//! used by every estimator in this crate.
//!
//! Entries are stored with the first index varying fastest (a generalized
//! column-major layout), so the linear position of `(i_1, …, i_d)` is
//! `i_1 + I_1·(i_2 + I_2·(i_3 + …))`. The mode-`n` unfolding places mode-`n`
//! fibers as columns; the remaining modes index the columns in ascending mode
//! order with the lowest mode varying fastest. Under this layout the
//! unfoldings of a PARAFAC tensor with factors `(A_1, …, A_d)` factor as
//! `[Y]_(n) = A_n (A_d ⋄ … ⋄ A_{n+1} ⋄ A_{n-1} ⋄ … ⋄ A_1)ᵀ`, which is the
//! ordering every least-squares update below depends on.

use crate::algebra::khatri_rao;
use crate::error::{Error, Result};
use crate::types::{c, CMat, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<C64>,
}

impl DenseTensor {
    /// Zero tensor of the given shape. Orders 3 and 4 are supported; every
    /// extent must be at least one.
    pub fn zeros(dims: &[usize]) -> Result<Self> {
        Self::check_dims(dims)?;
        let len = dims.iter().product();
        Ok(DenseTensor {
            dims: dims.to_vec(),
            data: vec![c(0.0, 0.0); len],
        })
    }

    /// Builds a tensor by evaluating `f` at every multi-index.
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> C64) -> Result<Self> {
        let mut t = Self::zeros(dims)?;
        let mut idx = vec![0usize; dims.len()];
        for lin in 0..t.data.len() {
            t.decode(lin, &mut idx);
            t.data[lin] = f(&idx);
        }
        Ok(t)
    }

    fn check_dims(dims: &[usize]) -> Result<()> {
        if dims.len() != 3 && dims.len() != 4 {
            return Err(Error::dims(format!(
                "tensor order must be 3 or 4, got {}",
                dims.len()
            )));
        }
        if dims.contains(&0) {
            return Err(Error::dims("tensor extents must be >= 1".to_string()));
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    fn linear(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut lin = 0;
        for k in (0..idx.len()).rev() {
            debug_assert!(idx[k] < self.dims[k]);
            lin = lin * self.dims[k] + idx[k];
        }
        lin
    }

    fn decode(&self, mut lin: usize, idx: &mut [usize]) {
        for (slot, &d) in idx.iter_mut().zip(&self.dims) {
            *slot = lin % d;
            lin /= d;
        }
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.data[self.linear(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: C64) {
        let lin = self.linear(idx);
        self.data[lin] = value;
    }

    /// Squared Frobenius norm.
    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Mode-`n` unfolding (`1 ≤ n ≤ order`). Pure reordering, no arithmetic.
    pub fn unfold(&self, mode: usize) -> Result<CMat> {
        let d = self.order();
        if mode == 0 || mode > d {
            return Err(Error::InvalidMode { mode, order: d });
        }
        let m = mode - 1;
        let rows = self.dims[m];
        let cols = self.data.len() / rows;
        let mut out = CMat::zeros(rows, cols);
        let mut idx = vec![0usize; d];
        for (lin, &v) in self.data.iter().enumerate() {
            self.decode(lin, &mut idx);
            out[(idx[m], column_index(&idx, &self.dims, m))] = v;
        }
        Ok(out)
    }

    /// Exact inverse of [`DenseTensor::unfold`].
    pub fn fold(mat: &CMat, mode: usize, dims: &[usize]) -> Result<Self> {
        Self::check_dims(dims)?;
        let d = dims.len();
        if mode == 0 || mode > d {
            return Err(Error::InvalidMode { mode, order: d });
        }
        let m = mode - 1;
        let total: usize = dims.iter().product();
        if mat.nrows() != dims[m] || mat.nrows() * mat.ncols() != total {
            return Err(Error::dims(format!(
                "fold: matrix {}x{} inconsistent with dims {:?} at mode {}",
                mat.nrows(),
                mat.ncols(),
                dims,
                mode
            )));
        }
        let mut t = Self::zeros(dims)?;
        let mut idx = vec![0usize; d];
        for lin in 0..total {
            t.decode(lin, &mut idx);
            t.data[lin] = mat[(idx[m], column_index(&idx, dims, m))];
        }
        Ok(t)
    }

    /// Mode-`n` product: the result satisfies `[C]_(n) = B · [self]_(n)`.
    pub fn n_mode_product(&self, b: &CMat, mode: usize) -> Result<Self> {
        let d = self.order();
        if mode == 0 || mode > d {
            return Err(Error::InvalidMode { mode, order: d });
        }
        if b.ncols() != self.dims[mode - 1] {
            return Err(Error::dims(format!(
                "n-mode product: B has {} columns, mode-{} extent is {}",
                b.ncols(),
                mode,
                self.dims[mode - 1]
            )));
        }
        let unfolded = self.unfold(mode)?;
        let product = b * unfolded;
        let mut new_dims = self.dims.clone();
        new_dims[mode - 1] = b.nrows();
        Self::fold(&product, mode, &new_dims)
    }
}

/// Unfolding column index of a multi-index: the remaining modes count in
/// ascending order with the lowest varying fastest.
fn column_index(idx: &[usize], dims: &[usize], skip: usize) -> usize {
    let mut col = 0;
    let mut stride = 1;
    for (k, (&i, &d)) in idx.iter().zip(dims).enumerate() {
        if k == skip {
            continue;
        }
        col += i * stride;
        stride *= d;
    }
    col
}

/// Third-order PARAFAC reconstruction: frontal slice `k` equals
/// `G · diag(row k of C) · Hᵀ`.
pub fn parafac3_reconstruct(g: &CMat, h: &CMat, c_factor: &CMat) -> Result<DenseTensor> {
    let n = g.ncols();
    if h.ncols() != n || c_factor.ncols() != n {
        return Err(Error::dims(format!(
            "parafac3: factor column counts differ ({}, {}, {})",
            n,
            h.ncols(),
            c_factor.ncols()
        )));
    }
    let unfold1 = g * khatri_rao(c_factor, h)?.transpose();
    DenseTensor::fold(&unfold1, 1, &[g.nrows(), h.nrows(), c_factor.nrows()])
}

/// Fourth-order PARAFAC reconstruction: slice `(p, k)` equals
/// `G · D_p(E) · D_k(S) · Hᵀ`.
pub fn parafac4_reconstruct(g: &CMat, h: &CMat, s: &CMat, e: &CMat) -> Result<DenseTensor> {
    let n = g.ncols();
    if h.ncols() != n || s.ncols() != n || e.ncols() != n {
        return Err(Error::dims(format!(
            "parafac4: factor column counts differ ({}, {}, {}, {})",
            n,
            h.ncols(),
            s.ncols(),
            e.ncols()
        )));
    }
    let kr = khatri_rao(e, &khatri_rao(s, h)?)?;
    let unfold1 = g * kr.transpose();
    DenseTensor::fold(&unfold1, 1, &[g.nrows(), h.nrows(), s.nrows(), e.nrows()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::khatri_rao;
    use approx::assert_relative_eq;

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut s = seed;
        move || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        }
    }

    fn rand_mat(rows: usize, cols: usize, seed: u64) -> CMat {
        let mut next = lcg(seed);
        CMat::from_fn(rows, cols, |_, _| c(next(), next()))
    }

    fn rand_tensor(dims: &[usize], seed: u64) -> DenseTensor {
        let mut next = lcg(seed);
        DenseTensor::from_fn(dims, |_| c(next(), next())).unwrap()
    }

    #[test]
    fn rank_one_unfold_matches_khatri_rao_column() {
        // T = g ∘ h ∘ s  =>  [T]_(1) = g (s ⋄ h)ᵀ
        let g = rand_mat(2, 1, 1);
        let h = rand_mat(3, 1, 2);
        let s = rand_mat(4, 1, 3);
        let t = DenseTensor::from_fn(&[2, 3, 4], |i| g[(i[0], 0)] * h[(i[1], 0)] * s[(i[2], 0)])
            .unwrap();
        let expected = &g * khatri_rao(&s, &h).unwrap().transpose();
        assert_relative_eq!(t.unfold(1).unwrap(), expected, epsilon = 1e-14);
    }

    #[test]
    fn unfold_fold_round_trip_all_modes() {
        let t3 = rand_tensor(&[2, 3, 4], 7);
        for mode in 1..=3 {
            let back = DenseTensor::fold(&t3.unfold(mode).unwrap(), mode, t3.dims()).unwrap();
            assert_eq!(back, t3, "order-3 mode {mode}");
        }
        let t4 = rand_tensor(&[2, 3, 4, 2], 8);
        for mode in 1..=4 {
            let back = DenseTensor::fold(&t4.unfold(mode).unwrap(), mode, t4.dims()).unwrap();
            assert_eq!(back, t4, "order-4 mode {mode}");
        }
    }

    #[test]
    fn fold_of_zero_matrix_is_zero_tensor() {
        let z = CMat::zeros(3, 8);
        let t = DenseTensor::fold(&z, 1, &[3, 4, 2]).unwrap();
        assert_eq!(t.norm_sq(), 0.0);
    }

    #[test]
    fn fold_rank_one_unfolding_recovers_outer_product() {
        let g = rand_mat(2, 1, 11);
        let h = rand_mat(3, 1, 12);
        let s = rand_mat(4, 1, 13);
        let unfold1 = &g * khatri_rao(&s, &h).unwrap().transpose();
        let t = DenseTensor::fold(&unfold1, 1, &[2, 3, 4]).unwrap();
        for l in 0..2 {
            for m in 0..3 {
                for k in 0..4 {
                    assert_relative_eq!(
                        t.get(&[l, m, k]),
                        g[(l, 0)] * h[(m, 0)] * s[(k, 0)],
                        epsilon = 1e-14
                    );
                }
            }
        }
    }

    #[test]
    fn invalid_modes_and_shapes_rejected() {
        let t = rand_tensor(&[2, 2, 2], 5);
        assert!(t.unfold(0).is_err());
        assert!(t.unfold(4).is_err());
        assert!(DenseTensor::fold(&CMat::zeros(2, 3), 1, &[2, 2, 2]).is_err());
        assert!(DenseTensor::zeros(&[2, 2]).is_err());
        assert!(DenseTensor::zeros(&[2, 0, 2]).is_err());
        let b = CMat::zeros(3, 5);
        assert!(t.n_mode_product(&b, 1).is_err());
    }

    #[test]
    fn n_mode_product_identity_and_commutation() {
        let t = rand_tensor(&[2, 3, 4], 21);
        let id = CMat::identity(3, 3);
        assert_eq!(t.n_mode_product(&id, 2).unwrap(), t);

        let a = rand_mat(5, 2, 22);
        let b = rand_mat(6, 3, 23);
        let ab = t
            .n_mode_product(&a, 1)
            .unwrap()
            .n_mode_product(&b, 2)
            .unwrap();
        let ba = t
            .n_mode_product(&b, 2)
            .unwrap()
            .n_mode_product(&a, 1)
            .unwrap();
        let diff: f64 = ab
            .data()
            .iter()
            .zip(ba.data())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum();
        assert!(diff < 1e-22);
    }

    #[test]
    fn n_mode_product_unfolding_contract() {
        let t = rand_tensor(&[2, 3, 4, 2], 31);
        for mode in 1..=4 {
            let b = rand_mat(5, t.dims()[mode - 1], 40 + mode as u64);
            let prod = t.n_mode_product(&b, mode).unwrap();
            let lhs = prod.unfold(mode).unwrap();
            let rhs = &b * t.unfold(mode).unwrap();
            assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn parafac3_scalar_form_brute_force() {
        let (l, m, k, n) = (2, 3, 4, 3);
        let g = rand_mat(l, n, 51);
        let h = rand_mat(m, n, 52);
        let cf = rand_mat(k, n, 53);
        let t = parafac3_reconstruct(&g, &h, &cf).unwrap();
        for li in 0..l {
            for mi in 0..m {
                for ki in 0..k {
                    let mut acc = c(0.0, 0.0);
                    for ni in 0..n {
                        acc += g[(li, ni)] * h[(mi, ni)] * cf[(ki, ni)];
                    }
                    let got = t.get(&[li, mi, ki]);
                    assert!((got - acc).norm() <= 1e-12 * acc.norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn parafac3_identity_tensor_route_matches() {
        // I_{3,N} ×1 G ×2 H ×3 C must agree with the direct reconstruction.
        let n = 3;
        let ident = DenseTensor::from_fn(&[n, n, n], |i| {
            if i[0] == i[1] && i[1] == i[2] {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
        .unwrap();
        let g = rand_mat(2, n, 61);
        let h = rand_mat(3, n, 62);
        let cf = rand_mat(4, n, 63);
        let via_products = ident
            .n_mode_product(&g, 1)
            .unwrap()
            .n_mode_product(&h, 2)
            .unwrap()
            .n_mode_product(&cf, 3)
            .unwrap();
        let direct = parafac3_reconstruct(&g, &h, &cf).unwrap();
        let diff: f64 = via_products
            .data()
            .iter()
            .zip(direct.data())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum();
        assert!(diff.sqrt() < 1e-12);
    }

    #[test]
    fn parafac3_single_component_slices_are_rank_one() {
        let g = rand_mat(2, 1, 74);
        let h = rand_mat(3, 1, 75);
        let cf = rand_mat(4, 1, 76);
        let t = parafac3_reconstruct(&g, &h, &cf).unwrap();
        for k in 0..4 {
            for l in 0..2 {
                for m in 0..3 {
                    assert_relative_eq!(
                        t.get(&[l, m, k]),
                        g[(l, 0)] * cf[(k, 0)] * h[(m, 0)],
                        epsilon = 1e-14
                    );
                }
            }
        }
    }

    #[test]
    fn parafac3_special_cases() {
        // C = ones => every slice equals G Hᵀ.
        let g = rand_mat(2, 3, 71);
        let h = rand_mat(3, 3, 72);
        let ones = CMat::from_element(4, 3, c(1.0, 0.0));
        let t = parafac3_reconstruct(&g, &h, &ones).unwrap();
        let gh = &g * h.transpose();
        for k in 0..4 {
            for l in 0..2 {
                for m in 0..3 {
                    assert_relative_eq!(t.get(&[l, m, k]), gh[(l, m)], epsilon = 1e-13);
                }
            }
        }
        assert!(parafac3_reconstruct(&g, &rand_mat(3, 2, 73), &ones).is_err());
    }

    #[test]
    fn parafac4_scalar_form_brute_force() {
        let (l, m, k, p, n) = (2, 3, 3, 2, 3);
        let g = rand_mat(l, n, 81);
        let h = rand_mat(m, n, 82);
        let s = rand_mat(k, n, 83);
        let e = rand_mat(p, n, 84);
        let t = parafac4_reconstruct(&g, &h, &s, &e).unwrap();
        for li in 0..l {
            for mi in 0..m {
                for ki in 0..k {
                    for pi in 0..p {
                        let mut acc = c(0.0, 0.0);
                        for ni in 0..n {
                            acc += g[(li, ni)] * h[(mi, ni)] * s[(ki, ni)] * e[(pi, ni)];
                        }
                        let got = t.get(&[li, mi, ki, pi]);
                        assert!((got - acc).norm() <= 1e-12 * acc.norm().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn parafac4_ones_frames_reduce_to_order3() {
        let g = rand_mat(2, 3, 91);
        let h = rand_mat(3, 3, 92);
        let s = rand_mat(4, 3, 93);
        let e = CMat::from_element(2, 3, c(1.0, 0.0));
        let t4 = parafac4_reconstruct(&g, &h, &s, &e).unwrap();
        let t3 = parafac3_reconstruct(&g, &h, &s).unwrap();
        for l in 0..2 {
            for m in 0..3 {
                for k in 0..4 {
                    for p in 0..2 {
                        assert_relative_eq!(
                            t4.get(&[l, m, k, p]),
                            t3.get(&[l, m, k]),
                            epsilon = 1e-13
                        );
                    }
                }
            }
        }
    }
}
