//! Reference implementations written straight from the flow formula, kept
//! apart from the library so they can serve as independent oracles.
#![allow(dead_code)]

/// `g(x, y)` of the five-state family: one unit flows from 4 into an adjacent 0.
pub fn g(x: i64, y: i64) -> i64 {
    match (x, y) {
        (0, 4) => 1,
        (4, 0) => -1,
        _ => 0,
    }
}

/// The pair function whose cyclic sum rotates signals: `h(0,4) = beta`.
pub fn h(beta: i64, x: i64, y: i64) -> i64 {
    beta * g(x, y)
}

/// `f(c,u,r,d,l) = c + g(c,u) + g(c,r) + g(c,d) + g(c,l) + h(u,r) + h(r,d) + h(d,l) + h(l,u)`.
pub fn reference_f(beta: i64, [c, u, r, d, l]: [i64; 5]) -> i64 {
    c + g(c, u) + g(c, r) + g(c, d) + g(c, l) + h(beta, u, r) + h(beta, r, d) + h(beta, d, l) + h(beta, l, u)
}

/// A dense grid with `y` growing upward, padded with the quiescent state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dense {
    pub x0: i32,
    pub y0: i32,
    pub w: usize,
    pub h: usize,
    pub q0: i64,
    pub cells: Vec<i64>,
}

impl Dense {
    pub fn new(x0: i32, y0: i32, w: usize, h: usize, q0: i64) -> Self {
        Dense { x0, y0, w, h, q0, cells: vec![q0; w * h] }
    }

    pub fn get(&self, x: i32, y: i32) -> i64 {
        let (i, j) = (x - self.x0, y - self.y0);
        if i < 0 || j < 0 || i as usize >= self.w || j as usize >= self.h {
            self.q0
        } else {
            self.cells[j as usize * self.w + i as usize]
        }
    }

    pub fn set(&mut self, x: i32, y: i32, s: i64) {
        let (i, j) = ((x - self.x0) as usize, (y - self.y0) as usize);
        self.cells[j * self.w + i] = s;
    }

    /// One step of the reference rule; panics if activity reaches the border.
    pub fn step(&self, beta: i64) -> Dense {
        let mut next = self.clone();
        for j in 0..self.h as i32 {
            for i in 0..self.w as i32 {
                let (x, y) = (self.x0 + i, self.y0 + j);
                let t = [self.get(x, y), self.get(x, y + 1), self.get(x + 1, y), self.get(x, y - 1), self.get(x - 1, y)];
                let v = reference_f(beta, t);
                let border = i == 0 || j == 0 || i == self.w as i32 - 1 || j == self.h as i32 - 1;
                assert!(!border || v == self.q0, "activity reached the border of the reference grid");
                next.set(x, y, v);
            }
        }
        next
    }

    pub fn sum(&self) -> i64 {
        self.cells.iter().map(|s| s - self.q0).sum()
    }
}
