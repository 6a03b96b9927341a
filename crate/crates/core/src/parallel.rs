//! Runtime switch between rayon fan-out and plain loops.
//!
//! With the `parallel` feature disabled every path runs sequentially and
//! `Parallelism::Rayon` silently behaves like `Serial`.

use faer::reborrow::ReborrowMut;
use faer::Par;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Parallelism {
    Serial,
    #[default]
    Rayon,
}

impl Parallelism {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Rayon
    }

    pub fn faer(self) -> Par {
        #[cfg(feature = "parallel")]
        if self == Parallelism::Rayon {
            return Par::rayon(0);
        }
        Par::Seq
    }
}

/// `out[i] = f(i)` for every index.
pub fn map_indexed<F>(par: Parallelism, out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        use rayon::prelude::*;
        out.par_iter_mut().enumerate().for_each(|(i, v)| *v = f(i));
        return;
    }
    let _ = par;
    for (i, v) in out.iter_mut().enumerate() {
        *v = f(i);
    }
}

/// Calls `f(j, column_j)` for each column of a column-major matrix.
pub fn for_each_column<F>(par: Parallelism, mut mat: faer::MatMut<'_, f64>, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        use rayon::prelude::*;
        mat.par_col_iter_mut().enumerate().for_each(|(j, col)| {
            f(j, col.try_as_col_major_mut().expect("contiguous column").as_slice_mut())
        });
        return;
    }
    let _ = par;
    for j in 0..mat.ncols() {
        let col = mat.rb_mut().col_mut(j);
        f(j, col.try_as_col_major_mut().expect("contiguous column").as_slice_mut());
    }
}

/// Collects `f(i)` for `i in 0..n`, in order.
pub fn collect<T, F>(par: Parallelism, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = par;
    (0..n).map(f).collect()
}
