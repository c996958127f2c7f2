use ndarray::Array2;

use super::{sum_all, Scalar, SymMatrix, Value, BRUTE_FORCE_BUDGET};
use crate::error::{Error, Result};
use crate::exec::Exec;

/// `n (n-1) ... (n-m+1)`, the value of `C_m` on the complete graph.
pub fn falling_factorial(n: u64, m: u64) -> u128 {
    (0..m).map(|i| u128::from(n.saturating_sub(i))).product()
}

struct Walk<'a, T> {
    a: &'a Array2<T>,
    m: usize,
    start: usize,
}

impl<T: Scalar> Walk<'_, T> {
    fn go(&self, depth: usize, last: usize, visited: &mut [bool], weight: T) -> T {
        if depth == self.m {
            return weight * self.a[[last, self.start]];
        }
        let mut acc = T::Acc::default();
        for j in 0..self.a.nrows() {
            let w = self.a[[last, j]];
            if visited[j] || w == T::zero() {
                continue;
            }
            visited[j] = true;
            T::acc_add(&mut acc, self.go(depth + 1, j, visited, weight * w));
            visited[j] = false;
        }
        T::acc_value(acc)
    }
}

/// Sum over distinct `(i_1, ..., i_m)` of `a[i_1,i_2] ... a[i_m,i_1]` by
/// direct enumeration. Refuses when `n^m` exceeds `budget`.
pub fn brute_force_value<T: Scalar>(a: &Array2<T>, m: usize, budget: f64, exec: Exec) -> Result<T> {
    let n = a.nrows();
    let estimate = (n as f64).powi(m as i32);
    if estimate > budget {
        return Err(Error::BudgetExceeded { estimate, budget });
    }
    if m < 3 {
        return Err(Error::order(m, "cycles need at least 3 vertices"));
    }
    let per_start = exec.map_range(n, |start| {
        let walk = Walk { a, m, start };
        let mut visited = vec![false; n];
        visited[start] = true;
        walk.go(1, start, &mut visited, T::one())
    });
    Ok(sum_all(per_start))
}

/// Brute-force `C_m` with the default budget.
pub fn brute_force_cm(a: &SymMatrix, m: usize, exec: Exec) -> Result<Value> {
    Ok(match a {
        SymMatrix::Float(x) => Value::Float(brute_force_value(x, m, BRUTE_FORCE_BUDGET, exec)?),
        SymMatrix::Integer(x) => Value::Integer(brute_force_value(x, m, BRUTE_FORCE_BUDGET, exec)?),
    })
}
