//! Sparse LU factorization of the simplex basis with Markowitz pivoting,
//! plus a product-form eta file for updates between refactorizations.
//!
//! The factorization works in "position space": pivot k is the k-th
//! elimination step, `pos_row[k]` is the matrix row it eliminated and
//! `pos_slot[k]` the basis slot (column) it used. All tie-breaking is by
//! lowest index so repeated factorizations of the same basis are identical.

use super::tol;

const DROP_TOL: f64 = 1e-13;
const REL_PIVOT: f64 = 0.01;
/// Columns examined per pivot search once a candidate exists.
const SEARCH_CAP: usize = 16;

#[derive(Debug, Clone)]
struct Eta {
    slot: usize,
    /// Sparse B^-1 a_q at the time of the basis change.
    w: Vec<(u32, f64)>,
    /// Value of w at `slot`.
    pivot: f64,
}

#[derive(Debug, Default)]
pub struct Factorization {
    m: usize,
    piv: Vec<f64>,
    pos_row: Vec<u32>,
    pos_slot: Vec<u32>,
    /// L column k: (position k2 > k, factor).
    l_cols: Vec<Vec<(u32, f64)>>,
    /// U row k off-diagonals: (position k2 > k, value).
    u_rows: Vec<Vec<(u32, f64)>>,
    /// U column k: (position k2 < k, value).
    u_cols: Vec<Vec<(u32, f64)>>,
    etas: Vec<Eta>,
    eta_nnz: usize,
}

/// Scratch buffers reused across solves.
#[derive(Debug, Default)]
pub struct Scratch {
    work: Vec<f64>,
    out_pos: Vec<f64>,
}

impl Factorization {
    pub fn num_etas(&self) -> usize {
        self.etas.len()
    }

    /// Factorize the basis given by `cols` (one sparse column per slot).
    /// Returns false if the basis is numerically singular.
    pub fn factor(&mut self, cols: &[&[(u32, f64)]]) -> bool {
        let m = cols.len();
        self.m = m;
        self.piv.clear();
        self.pos_row.clear();
        self.pos_slot.clear();
        self.l_cols.clear();
        self.u_rows.clear();
        self.u_cols.clear();
        self.etas.clear();
        self.eta_nnz = 0;
        if m == 0 {
            return true;
        }

        // Working row-major matrix; column ids here are basis slots.
        let mut rows_ws: Vec<Vec<(u32, f64)>> = vec![Vec::new(); m];
        let mut col_rows: Vec<Vec<u32>> = vec![Vec::new(); m];
        let mut col_nnz: Vec<u32> = vec![0; m];
        for (slot, col) in cols.iter().enumerate() {
            for &(r, v) in col.iter() {
                if v != 0.0 {
                    rows_ws[r as usize].push((slot as u32, v));
                    col_rows[slot].push(r);
                    col_nnz[slot] += 1;
                }
            }
        }
        let mut row_active = vec![true; m];
        let mut col_active = vec![true; m];

        // Buckets of columns by (possibly stale) nonzero count.
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); m + 1];
        for c in 0..m {
            buckets[col_nnz[c] as usize].push(c as u32);
        }

        // Dedup marker for column row lists.
        let mut seen: Vec<u32> = vec![u32::MAX; m];
        // Recorded pivots: (row, slot, value), L entries by row id.
        let mut l_raw: Vec<Vec<(u32, f64)>> = Vec::with_capacity(m);
        let mut u_raw: Vec<Vec<(u32, f64)>> = Vec::with_capacity(m);
        let mut merge_buf: Vec<(u32, f64)> = Vec::new();

        for step in 0..m {
            // Pivot search: scan buckets of increasing column count.
            let mut best: Option<(u64, f64, u32, u32)> = None; // score, |v|, col, row
            let mut examined = 0usize;
            'search: for size in 1..=m {
                let mut idx = 0;
                while idx < buckets[size].len() {
                    let c = buckets[size][idx] as usize;
                    idx += 1;
                    if !col_active[c] {
                        continue;
                    }
                    let actual = col_nnz[c] as usize;
                    if actual != size {
                        if actual > 0 {
                            buckets[actual].push(c as u32);
                        }
                        continue;
                    }
                    // Find the column's max magnitude and candidates.
                    let mut max_abs = 0.0f64;
                    let mut entries: Vec<(u32, f64, u32)> = Vec::new(); // row, val, row_nnz
                    for &r in &col_rows[c] {
                        let r = r as usize;
                        if !row_active[r] || seen[r] == step as u32 {
                            continue;
                        }
                        if let Some(&(_, v)) = rows_ws[r].iter().find(|&&(cc, _)| cc as usize == c) {
                            seen[r] = step as u32;
                            let a = v.abs();
                            if a > max_abs {
                                max_abs = a;
                            }
                            entries.push((r as u32, v, rows_ws[r].len() as u32));
                        }
                    }
                    // Reset markers for the next column scan.
                    for &(r, _, _) in &entries {
                        seen[r as usize] = u32::MAX;
                    }
                    if entries.is_empty() {
                        col_nnz[c] = 0;
                        continue;
                    }
                    let thresh = (REL_PIVOT * max_abs).max(tol::PIVOT);
                    for &(r, v, rn) in &entries {
                        if v.abs() < thresh {
                            continue;
                        }
                        let score = (entries.len() as u64 - 1) * (rn as u64 - 1);
                        let better = match best {
                            None => true,
                            Some((bs, bv, bc, br)) => {
                                (score, -v.abs(), c as u32, r) < (bs, -bv, bc, br)
                            }
                        };
                        if better {
                            best = Some((score, v.abs(), c as u32, r));
                        }
                    }
                    if best.is_some() {
                        examined += 1;
                        if examined >= SEARCH_CAP || best.as_ref().unwrap().0 == 0 {
                            break 'search;
                        }
                    }
                }
            }

            let (_, _, c, r) = match best {
                Some(b) => b,
                None => return false, // singular
            };
            let (r, c) = (r as usize, c as usize);
            let piv_val = rows_ws[r]
                .iter()
                .find(|&&(cc, _)| cc as usize == c)
                .map(|&(_, v)| v)
                .expect("pivot entry");

            // Record U row (off-diagonal entries by slot id, translated later)
            // and decrement column counters for the departing row.
            let pivot_row = std::mem::take(&mut rows_ws[r]);
            let mut u_entries: Vec<(u32, f64)> = Vec::with_capacity(pivot_row.len() - 1);
            for &(c2, v2) in &pivot_row {
                if c2 as usize != c {
                    u_entries.push((c2, v2));
                    col_nnz[c2 as usize] -= 1;
                    buckets[col_nnz[c2 as usize] as usize].push(c2);
                }
            }

            // Eliminate column c from all other active rows.
            let mut l_entries: Vec<(u32, f64)> = Vec::new();
            let col_list = std::mem::take(&mut col_rows[c]);
            for &r2 in &col_list {
                let r2 = r2 as usize;
                if r2 == r || !row_active[r2] || seen[r2] == (m + step) as u32 {
                    continue;
                }
                seen[r2] = (m + step) as u32;
                let pos_c = match rows_ws[r2].iter().position(|&(cc, _)| cc as usize == c) {
                    Some(p) => p,
                    None => continue, // stale
                };
                let v2 = rows_ws[r2][pos_c].1;
                let factor = v2 / piv_val;
                l_entries.push((r2 as u32, factor));
                // Merge: row_r2 <- row_r2 - factor * pivot_row (minus pivot col).
                merge_buf.clear();
                for &(c2, old) in &rows_ws[r2] {
                    if c2 as usize != c {
                        merge_buf.push((c2, old));
                    }
                }
                for &(c2, uv) in &u_entries {
                    let delta = -factor * uv;
                    if let Some(slot) = merge_buf.iter_mut().find(|e| e.0 == c2) {
                        let newv = slot.1 + delta;
                        if newv.abs() < DROP_TOL {
                            slot.1 = f64::NAN; // mark removal
                            col_nnz[c2 as usize] -= 1;
                            buckets[col_nnz[c2 as usize] as usize].push(c2);
                        } else {
                            slot.1 = newv;
                        }
                    } else if delta.abs() >= DROP_TOL {
                        merge_buf.push((c2, delta));
                        col_rows[c2 as usize].push(r2 as u32);
                        col_nnz[c2 as usize] += 1;
                        buckets[col_nnz[c2 as usize] as usize].push(c2);
                    }
                }
                rows_ws[r2].clear();
                rows_ws[r2].extend(merge_buf.iter().filter(|e| !e.1.is_nan()));
            }

            row_active[r] = false;
            col_active[c] = false;
            col_nnz[c] = 0;
            self.piv.push(piv_val);
            self.pos_row.push(r as u32);
            self.pos_slot.push(c as u32);
            l_raw.push(l_entries);
            u_raw.push(u_entries);
        }

        // Translate row/slot ids to positions.
        let mut row_to_pos = vec![0u32; m];
        let mut slot_to_pos = vec![0u32; m];
        for k in 0..m {
            row_to_pos[self.pos_row[k] as usize] = k as u32;
            slot_to_pos[self.pos_slot[k] as usize] = k as u32;
        }
        self.l_cols = l_raw
            .into_iter()
            .map(|col| col.into_iter().map(|(r2, f)| (row_to_pos[r2 as usize], f)).collect())
            .collect();
        self.u_rows = u_raw
            .into_iter()
            .map(|row| row.into_iter().map(|(c2, v)| (slot_to_pos[c2 as usize], v)).collect())
            .collect();
        self.u_cols = vec![Vec::new(); m];
        for k in 0..m {
            for &(k2, v) in &self.u_rows[k] {
                self.u_cols[k2 as usize].push((k as u32, v));
            }
        }
        true
    }

    fn ensure_scratch(&self, s: &mut Scratch) {
        if s.work.len() != self.m {
            s.work = vec![0.0; self.m];
            s.out_pos = vec![0.0; self.m];
        }
    }

    /// Solve B z = b. `b` is indexed by row, `z` by basis slot.
    pub fn ftran(&self, b: &[f64], z: &mut [f64], s: &mut Scratch) {
        let m = self.m;
        self.ensure_scratch(s);
        for k in 0..m {
            s.work[k] = b[self.pos_row[k] as usize];
        }
        // L forward (unit diagonal).
        for k in 0..m {
            let v = s.work[k];
            if v != 0.0 {
                for &(k2, f) in &self.l_cols[k] {
                    s.work[k2 as usize] -= f * v;
                }
            }
        }
        // U backward.
        for k in (0..m).rev() {
            let mut acc = s.work[k];
            for &(k2, u) in &self.u_rows[k] {
                acc -= u * s.out_pos[k2 as usize];
            }
            s.out_pos[k] = acc / self.piv[k];
        }
        for k in 0..m {
            z[self.pos_slot[k] as usize] = s.out_pos[k];
        }
        // Product-form etas, forward order.
        for eta in &self.etas {
            let v = z[eta.slot] / eta.pivot;
            if v != 0.0 {
                for &(i, wi) in &eta.w {
                    if i as usize != eta.slot {
                        z[i as usize] -= wi * v;
                    }
                }
            }
            z[eta.slot] = v;
        }
    }

    /// Solve B^T y = c. `c` is indexed by basis slot, `y` by row.
    pub fn btran(&self, c: &[f64], y: &mut [f64], s: &mut Scratch) {
        let m = self.m;
        self.ensure_scratch(s);
        // Apply eta adjoints in reverse order.
        let mut c_adj: Vec<f64> = c.to_vec();
        for eta in self.etas.iter().rev() {
            let mut acc = c_adj[eta.slot];
            for &(i, wi) in &eta.w {
                if i as usize != eta.slot {
                    acc -= wi * c_adj[i as usize];
                }
            }
            c_adj[eta.slot] = acc / eta.pivot;
        }
        for k in 0..m {
            s.work[k] = c_adj[self.pos_slot[k] as usize];
        }
        // U^T forward (divides by pivots).
        for k in 0..m {
            let mut acc = s.work[k];
            for &(k2, u) in &self.u_cols[k] {
                acc -= u * s.out_pos[k2 as usize];
            }
            s.out_pos[k] = acc / self.piv[k];
        }
        // L^T backward (unit diagonal).
        for k in (0..m).rev() {
            let mut acc = s.out_pos[k];
            for &(k2, f) in &self.l_cols[k] {
                acc -= f * s.out_pos[k2 as usize];
            }
            s.out_pos[k] = acc;
        }
        for k in 0..m {
            y[self.pos_row[k] as usize] = s.out_pos[k];
        }
    }

    /// Record a basis change: the column whose FTRAN result was `w`
    /// replaces the variable at `slot`.
    pub fn push_eta(&mut self, slot: usize, w: &[f64]) {
        let mut entries: Vec<(u32, f64)> = Vec::new();
        for (i, &v) in w.iter().enumerate() {
            if v.abs() > DROP_TOL {
                entries.push((i as u32, v));
            }
        }
        let pivot = w[slot];
        self.eta_nnz += entries.len();
        self.etas.push(Eta { slot, w: entries, pivot });
    }
}
