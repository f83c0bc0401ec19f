//! Forward count series `q_0..q_N`, two position layers at a time.
//!
//! The fast path stores every cell as `w` limbs of `r` bits in a `u64`
//! each, with carries resolved lazily: after normalization every limb is
//! below `2^(r+1)`, and `r` is chosen so that adding `|S|` such cells
//! cannot overflow. A layer is a dense row-major block (rows indexed by
//! `y`, contiguous `x` cells) so that each step is one shifted slice-add
//! per source row.
//!
//! For `Endpoint::Any` the walk only needs to be tracked in full while it
//! can still hit an axis before the horizon. A cell with
//! `x >= left * (N - t)` can never leave through `x = 0` again, so it is
//! moved into a one-dimensional `y` walk, and symmetrically for `y`. Cells
//! free in both directions collapse into a scalar multiplied by `|S|`.

use num_bigint::BigUint;
use num_traits::Zero;

use super::{CountSeries, Endpoint};
use crate::stepset::StepSet;

/// Straightforward big-integer DP over the full reachable box. Slow, used
/// as an oracle for the fast path.
pub fn quadrant_counts_reference(s: &StepSet, n_max: usize, endpoint: Endpoint) -> CountSeries {
    let (a, b) = s.max_up();
    let (a, b) = (a as usize, b as usize);
    let mut width = 1usize;
    let mut height = 1usize;
    let mut cur = vec![BigUint::from(1u32)];
    let mut values = vec![endpoint_sum(&cur, width, height, endpoint)];
    for _ in 0..n_max {
        let (nw, nh) = (width + a, height + b);
        let mut next = vec![BigUint::zero(); nw * nh];
        for y in 0..height {
            for x in 0..width {
                let c = &cur[y * width + x];
                if c.is_zero() {
                    continue;
                }
                for st in s.steps() {
                    let (nx, ny) = (x as i64 + st.dx, y as i64 + st.dy);
                    if nx >= 0 && ny >= 0 {
                        next[ny as usize * nw + nx as usize] += c;
                    }
                }
            }
        }
        cur = next;
        width = nw;
        height = nh;
        values.push(endpoint_sum(&cur, width, height, endpoint));
    }
    CountSeries::new(endpoint, values)
}

fn endpoint_sum(cells: &[BigUint], width: usize, height: usize, endpoint: Endpoint) -> BigUint {
    let mut total = BigUint::zero();
    for y in 0..height {
        for x in 0..width {
            if endpoint.accepts(x as i64, y as i64) {
                total += &cells[y * width + x];
            }
        }
    }
    total
}

/// Bits per limb: `|S| * 2^(r+1) <= 2^64`, and at most 61 so that four
/// normalized limbs can be summed in a `u64`.
fn limb_bits(n_steps: usize) -> u32 {
    let ceil_log2 = if n_steps <= 1 {
        0
    } else {
        usize::BITS - (n_steps - 1).leading_zeros()
    };
    assert!(ceil_log2 <= 40, "step multiset too large for the limb DP");
    (63 - ceil_log2).min(61)
}

struct Limbs {
    r: u32,
    mask: u64,
}

impl Limbs {
    #[inline]
    fn normalize(&self, cell: &mut [u64]) {
        for k in (1..cell.len()).rev() {
            cell[k] = (cell[k] & self.mask) + (cell[k - 1] >> self.r);
        }
        cell[0] &= self.mask;
    }

    /// `out = normalized(v)` for consecutive cells; the carry out of a
    /// cell's top limb is always zero, so crossing a cell boundary is fine.
    #[inline]
    fn normalize_into(&self, v: &[u64], out: &mut [u64]) {
        out[0] = v[0] & self.mask;
        for (o, (hi, lo)) in out[1..].iter_mut().zip(v[1..].iter().zip(v)) {
            *o = (hi & self.mask).wrapping_add(lo >> self.r);
        }
    }

    fn add_into(&self, dst: &mut [u64], src: &[u64]) {
        add_slice(dst, src);
        self.normalize(dst);
    }

    /// Interprets `acc[k]` as the coefficient of `2^(r k)`.
    fn acc_to_biguint(&self, acc: &mut [u128]) -> BigUint {
        let r = self.r as usize;
        let mut carry = 0u128;
        let mut digits = Vec::with_capacity(acc.len() + 3);
        for v in acc.iter() {
            let t = *v + carry;
            digits.push((t as u64) & self.mask);
            carry = t >> r;
        }
        while carry > 0 {
            digits.push((carry as u64) & self.mask);
            carry >>= r;
        }
        let total_bits = digits.len() * r;
        let mut words = vec![0u64; total_bits / 64 + 2];
        for (k, &d) in digits.iter().enumerate() {
            let bit = k * r;
            let (wi, off) = (bit / 64, bit % 64);
            words[wi] |= d << off;
            if off + r > 64 {
                words[wi + 1] |= d >> (64 - off);
            }
        }
        let mut u32s = Vec::with_capacity(words.len() * 2);
        for wd in words {
            u32s.push(wd as u32);
            u32s.push((wd >> 32) as u32);
        }
        BigUint::new(u32s)
    }
}

#[inline]
fn add_slice(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d = d.wrapping_add(*s);
    }
}

#[inline]
fn add_slice_scaled(dst: &mut [u64], src: &[u64], m: u64) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d = d.wrapping_add(s.wrapping_mul(m));
    }
}

/// Distinct displacements with multiplicities.
fn grouped<K: Ord + Copy>(keys: impl Iterator<Item = K>) -> Vec<(K, u64)> {
    let mut v: Vec<K> = keys.collect();
    v.sort();
    let mut out: Vec<(K, u64)> = Vec::new();
    for k in v {
        match out.last_mut() {
            Some((last, m)) if *last == k => *m += 1,
            _ => out.push((k, 1)),
        }
    }
    out
}

/// One-dimensional marginal walk stored as `len` cells of `w` limbs.
struct Marginal {
    cells: Vec<u64>,
    len: usize,
}

impl Marginal {
    fn new() -> Self {
        Marginal { cells: Vec::new(), len: 0 }
    }

    fn widen(&mut self, w_old: usize, w_new: usize) {
        self.cells = rewidth(&self.cells, self.len, w_old, w_new);
    }

    /// `next[z] = sum over steps of cur[z - d]`, restricted to `z >= 0`.
    fn step(&mut self, moves: &[(i64, u64)], up: usize, w: usize, limbs: &Limbs, scratch: &mut Vec<u64>) {
        if self.len == 0 {
            return;
        }
        let new_len = self.len + up;
        scratch.clear();
        scratch.resize(new_len * w, 0);
        for &(d, m) in moves {
            let lo = d.max(0) as usize;
            let hi = (self.len as i64 + d).min(new_len as i64);
            if hi <= lo as i64 {
                continue;
            }
            let hi = hi as usize;
            let src_lo = (lo as i64 - d) as usize;
            let dst = &mut scratch[lo * w..hi * w];
            let src = &self.cells[src_lo * w..(src_lo + hi - lo) * w];
            if m == 1 {
                add_slice(dst, src);
            } else {
                add_slice_scaled(dst, src, m);
            }
        }
        for cell in scratch.chunks_exact_mut(w) {
            limbs.normalize(cell);
        }
        std::mem::swap(&mut self.cells, scratch);
        self.len = new_len;
    }

    fn ensure_len(&mut self, len: usize, w: usize) {
        if self.len < len {
            self.cells.resize(len * w, 0);
            self.len = len;
        }
    }

    /// Moves cells at index `>= bound` into `sink`.
    fn spill(&mut self, bound: usize, w: usize, limbs: &Limbs, sink: &mut [u64]) {
        if self.len <= bound {
            return;
        }
        for cell in self.cells[bound * w..self.len * w].chunks_exact(w) {
            limbs.add_into(sink, cell);
        }
        self.cells.truncate(bound * w);
        self.len = bound;
    }
}

fn rewidth(cells: &[u64], count: usize, w_old: usize, w_new: usize) -> Vec<u64> {
    let mut out = vec![0u64; count * w_new];
    for i in 0..count {
        out[i * w_new..i * w_new + w_old].copy_from_slice(&cells[i * w_old..(i + 1) * w_old]);
    }
    out
}

/// Exact counts of quadrant walks of length `0..=n_max` ending anywhere,
/// at the origin, or on the diagonal.
pub fn quadrant_counts(s: &StepSet, n_max: usize, endpoint: Endpoint) -> CountSeries {
    let r = limb_bits(s.len());
    let limbs = Limbs { r, mask: (1u64 << r) - 1 };
    let log_s = (usize::BITS - s.len().leading_zeros()) as u64;
    let (a, b) = s.max_up();
    let (left, down) = s.max_down();
    let (a, b, left, down) = (a as usize, b as usize, left as usize, down as usize);
    let moves2 = grouped(s.steps().iter().map(|t| (t.dy, t.dx)));
    let unit_moves = moves2.iter().all(|(_, m)| *m == 1);
    let moves_y = grouped(s.steps().iter().map(|t| t.dy));
    let moves_x = grouped(s.steps().iter().map(|t| t.dx));
    let n_steps = s.len() as u64;
    let absorb = endpoint == Endpoint::Any;
    // Number of steps leaving the quadrant from a cell near an axis.
    let exits = |x: usize, y: usize, track_x: bool, track_y: bool| -> u128 {
        s.steps()
            .iter()
            .filter(|t| {
                (track_x && (x as i64 + t.dx) < 0) || (track_y && (y as i64 + t.dy) < 0)
            })
            .count() as u128
    };

    let mut w = 1usize;
    // Current layer: `stride`-wide rows, of which the live box is
    // `live_y x live_x` in the lower-left corner.
    let mut grid: Vec<u64> = vec![1];
    let mut stride = 1usize;
    let (mut live_x, mut live_y): (usize, usize);
    let mut next: Vec<u64> = Vec::new();
    let mut ym = Marginal::new();
    let mut xm = Marginal::new();
    let mut free = vec![0u64; 1];
    let mut scratch = Vec::new();
    let mut chunk_buf: Vec<u64> = Vec::new();

    let bounds = |t: usize, full_x: usize, full_y: usize| -> (usize, usize) {
        let rem = n_max - t;
        match endpoint {
            Endpoint::Any => (full_x.min(left * rem), full_y.min(down * rem)),
            Endpoint::Origin => (full_x.min(left * rem + 1), full_y.min(down * rem + 1)),
            Endpoint::Diagonal => (full_x, full_y),
        }
    };

    {
        let (lx, ly) = bounds(0, 1, 1);
        live_x = lx;
        live_y = ly;
        if lx == 0 || ly == 0 {
            if lx == 0 && ly == 0 {
                free[0] = 1;
            } else if lx == 0 {
                ym.ensure_len(1, 1);
                ym.cells[0] = 1;
            } else {
                xm.ensure_len(1, 1);
                xm.cells[0] = 1;
            }
            live_x = 0;
            live_y = 0;
        }
    }
    let mut values = Vec::with_capacity(n_max + 1);
    values.push(BigUint::from(1u32));
    // Walks of length t still inside the quadrant, whatever their endpoint;
    // bounds every cell of the next layer.
    let mut total = BigUint::from(1u32);

    let mut loss: Vec<u128> = Vec::new();
    let mut ep_acc: Vec<u128> = Vec::new();
    for t in 1..=n_max {
        let w_needed = (total.bits().max(1) + log_s + 2).div_ceil(r as u64) as usize;
        if w_needed > w {
            let w_new = w_needed + w_needed / 8 + 1;
            grid = rewidth_grid(&grid, stride, live_x, live_y, w, w_new);
            stride = live_x;
            ym.widen(w, w_new);
            xm.widen(w, w_new);
            free.resize(w_new, 0);
            w = w_new;
        }

        // Mass lost through the axes during this step.
        loss.clear();
        loss.resize(w, 0);
        let mut lose = |cell: &[u64], e: u128| {
            if e > 0 {
                for (l, &c) in loss.iter_mut().zip(cell) {
                    *l += c as u128 * e;
                }
            }
        };
        for y in 0..live_y {
            let row = &grid[y * stride * w..];
            if y < down {
                for x in 0..live_x {
                    lose(&row[x * w..(x + 1) * w], exits(x, y, true, true));
                }
            } else {
                for x in 0..left.min(live_x) {
                    lose(&row[x * w..(x + 1) * w], exits(x, y, true, false));
                }
            }
        }
        for y in 0..down.min(ym.len) {
            lose(&ym.cells[y * w..(y + 1) * w], exits(0, y, false, true));
        }
        for x in 0..left.min(xm.len) {
            lose(&xm.cells[x * w..(x + 1) * w], exits(x, 0, true, false));
        }
        total = total * BigUint::from(n_steps) - limbs.acc_to_biguint(&mut loss);

        ym.step(&moves_y, b, w, &limbs, &mut scratch);
        xm.step(&moves_x, a, w, &limbs, &mut scratch);
        if absorb {
            for l in free.iter_mut() {
                *l *= n_steps;
            }
            limbs.normalize(&mut free);
        }

        let (full_x, full_y) = if live_x == 0 || live_y == 0 {
            (0, 0)
        } else {
            (live_x + a, live_y + b)
        };
        let (new_lx, new_ly) = bounds(t, full_x, full_y);
        if absorb {
            let rem = n_max - t;
            ym.spill(down * rem, w, &limbs, &mut free);
            xm.spill(left * rem, w, &limbs, &mut free);
            ym.ensure_len(new_ly, w);
            xm.ensure_len(new_lx, w);
        }

        ep_acc.clear();
        ep_acc.resize(w, 0);
        let row_len = full_x * w;
        let chunk_cells = (2048 / w).max(1);
        chunk_buf.resize(chunk_cells * w, 0);
        next.resize(full_y * row_len, 0);
        for y in 0..full_y {
            if y >= new_ly && !absorb {
                break;
            }
            let row = &mut next[y * row_len..(y + 1) * row_len];
            let src_row = |dy: i64| -> Option<&[u64]> {
                let ys = y as i64 - dy;
                (ys >= 0 && ys < live_y as i64)
                    .then(|| &grid[ys as usize * stride * w..(ys as usize * stride + live_x) * w])
            };
            // Chunks inside [xlo, xhi) are covered by every move with a
            // source row and sum their sources in one pass.
            let active = moves2.iter().filter(|((dy, _), _)| src_row(*dy).is_some());
            let (mut xlo, mut xhi) = (0i64, full_x as i64);
            for &((_, dx), _) in active {
                xlo = xlo.max(dx);
                xhi = xhi.min(live_x as i64 + dx);
            }
            let (xlo, xhi) = (xlo as usize, xhi.max(0) as usize);
            let mut cx0 = 0;
            while cx0 < full_x {
                let mut cx1 = (cx0 + chunk_cells).min(full_x);
                for edge in [xlo, xhi] {
                    if edge > cx0 && edge < cx1 {
                        cx1 = edge;
                    }
                }
                let sc = &mut chunk_buf[..(cx1 - cx0) * w];
                if unit_moves && cx0 >= xlo && cx1 <= xhi {
                    let mut first = true;
                    let mut g: [&[u64]; 6] = [&[]; 6];
                    let mut k = 0;
                    for &((dy, dx), _) in &moves2 {
                        let Some(r) = src_row(dy) else { continue };
                        let lo = (cx0 as i64 - dx) as usize;
                        g[k] = &r[lo * w..(lo + cx1 - cx0) * w];
                        k += 1;
                        if k == 6 {
                            sum_sources(sc, &g, first);
                            first = false;
                            k = 0;
                        }
                    }
                    if k > 0 {
                        sum_sources(sc, &g[..k], first);
                    } else if first {
                        sc.fill(0);
                    }
                } else {
                    sc.fill(0);
                    for &((dy, dx), m) in &moves2 {
                        let Some(srow) = src_row(dy) else { continue };
                        let lo = (dx.max(0) as usize).max(cx0);
                        let hi = ((live_x as i64 + dx).min(cx1 as i64)).max(0) as usize;
                        if hi <= lo {
                            continue;
                        }
                        let src_lo = (lo as i64 - dx) as usize;
                        let src = &srow[src_lo * w..(src_lo + hi - lo) * w];
                        let d = &mut sc[(lo - cx0) * w..(hi - cx0) * w];
                        if m == 1 {
                            add_slice(d, src);
                        } else {
                            add_slice_scaled(d, src, m);
                        }
                    }
                }
                limbs.normalize_into(sc, &mut row[cx0 * w..cx1 * w]);
                cx0 = cx1;
            }
            if y < new_ly {
                match endpoint {
                    Endpoint::Origin if y == 0 && new_lx > 0 => {
                        for (e, &l) in ep_acc.iter_mut().zip(&row[..w]) {
                            *e += l as u128;
                        }
                    }
                    Endpoint::Diagonal if y < new_lx => {
                        for (e, &l) in ep_acc.iter_mut().zip(&row[y * w..(y + 1) * w]) {
                            *e += l as u128;
                        }
                    }
                    _ => {}
                }
                if absorb {
                    for x in new_lx..full_x {
                        limbs.add_into(&mut ym.cells[y * w..(y + 1) * w], &row[x * w..(x + 1) * w]);
                    }
                }
            } else {
                for x in 0..full_x {
                    let cell = &row[x * w..(x + 1) * w];
                    if x < new_lx {
                        limbs.add_into(&mut xm.cells[x * w..(x + 1) * w], cell);
                    } else {
                        limbs.add_into(&mut free, cell);
                    }
                }
            }
        }
        std::mem::swap(&mut grid, &mut next);
        stride = full_x;
        live_x = new_lx;
        live_y = new_ly;
        if live_x == 0 || live_y == 0 {
            live_x = 0;
            live_y = 0;
        }
        values.push(match endpoint {
            Endpoint::Any => total.clone(),
            _ => limbs.acc_to_biguint(&mut ep_acc),
        });
    }
    CountSeries::new(endpoint, values)
}

/// `dst = sum of srcs`, or `dst += sum of srcs` when `init` is false;
/// one pass for up to six sources.
fn sum_sources(dst: &mut [u64], srcs: &[&[u64]], init: bool) {
    let keep = if init { 0 } else { u64::MAX };
    match srcs.len() {
        1 => {
            for (d, a) in dst.iter_mut().zip(srcs[0]) {
                *d = (*d & keep).wrapping_add(*a);
            }
        }
        2 => {
            for ((d, a), b) in dst.iter_mut().zip(srcs[0]).zip(srcs[1]) {
                *d = (*d & keep).wrapping_add(a.wrapping_add(*b));
            }
        }
        3 => {
            for (((d, a), b), c) in dst.iter_mut().zip(srcs[0]).zip(srcs[1]).zip(srcs[2]) {
                *d = (*d & keep).wrapping_add(a.wrapping_add(*b).wrapping_add(*c));
            }
        }
        4 => {
            for ((((d, a), b), c), e) in dst
                .iter_mut()
                .zip(srcs[0])
                .zip(srcs[1])
                .zip(srcs[2])
                .zip(srcs[3])
            {
                *d = (*d & keep).wrapping_add(a.wrapping_add(*b).wrapping_add(c.wrapping_add(*e)));
            }
        }
        5 => {
            for (((((d, a), b), c), e), f) in dst
                .iter_mut()
                .zip(srcs[0])
                .zip(srcs[1])
                .zip(srcs[2])
                .zip(srcs[3])
                .zip(srcs[4])
            {
                *d = (*d & keep).wrapping_add(a.wrapping_add(*b).wrapping_add(c.wrapping_add(*e)).wrapping_add(*f));
            }
        }
        6 => {
            for ((((((d, a), b), c), e), f), g) in dst
                .iter_mut()
                .zip(srcs[0])
                .zip(srcs[1])
                .zip(srcs[2])
                .zip(srcs[3])
                .zip(srcs[4])
                .zip(srcs[5])
            {
                *d = (*d & keep)
                    .wrapping_add(a.wrapping_add(*b).wrapping_add(c.wrapping_add(*e)))
                    .wrapping_add(f.wrapping_add(*g));
            }
        }
        _ => unreachable!("one to six sources per pass"),
    }
}

fn rewidth_grid(grid: &[u64], stride: usize, live_x: usize, live_y: usize, w_old: usize, w_new: usize) -> Vec<u64> {
    let mut out = vec![0u64; live_x * live_y * w_new];
    for y in 0..live_y {
        for x in 0..live_x {
            let src = (y * stride + x) * w_old;
            let dst = (y * live_x + x) * w_new;
            out[dst..dst + w_old].copy_from_slice(&grid[src..src + w_old]);
        }
    }
    out
}
