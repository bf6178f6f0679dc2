//! Moore-neighbour boundary tracing on binary masks (8-connectivity).

/// Clockwise neighbourhood (image coordinates, y down) starting at west.
const DIRS: [(i64, i64); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

fn dir_index(dx: i64, dy: i64) -> usize {
    DIRS.iter()
        .position(|&d| d == (dx, dy))
        .expect("unit neighbour offset")
}

/// Traces the outer boundary of the 8-connected component that owns the first
/// foreground pixel in raster order. Returns pixel coordinates in tracing order;
/// the closing step back to the first pixel is implicit.
///
/// Stops when the start pixel is re-entered with the same outgoing move it
/// started with (Jacob's criterion), so one-pixel-wide bridges are walked twice.
pub fn trace_outer_boundary(mask: &[u8], width: usize, height: usize) -> Vec<(i64, i64)> {
    let (w, h) = (width as i64, height as i64);
    let fg = |x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h && mask[(y * w + x) as usize] != 0;

    let Some(first) = mask.iter().position(|&p| p != 0) else {
        return Vec::new();
    };
    let start = ((first % width) as i64, (first / width) as i64);

    let mut contour = vec![start];
    let mut cur = start;
    // West of the raster-first pixel is always background.
    let mut backtrack = 0usize;
    let mut first_move: Option<usize> = None;

    loop {
        let mut found = None;
        for k in 1..=8 {
            let d = (backtrack + k) % 8;
            let (nx, ny) = (cur.0 + DIRS[d].0, cur.1 + DIRS[d].1);
            if fg(nx, ny) {
                found = Some((d, (nx, ny)));
                break;
            }
        }
        let Some((d, next)) = found else {
            // isolated pixel
            return contour;
        };
        if cur == start {
            match first_move {
                None => first_move = Some(d),
                Some(m) if m == d => break,
                Some(_) => {}
            }
        }
        // The last background neighbour examined becomes the new backtrack point.
        let prev = (d + 7) % 8;
        let bx = cur.0 + DIRS[prev].0;
        let by = cur.1 + DIRS[prev].1;
        backtrack = dir_index(bx - next.0, by - next.1);
        cur = next;
        if cur == start {
            continue;
        }
        contour.push(cur);
    }
    contour
}

/// Number of axis-aligned and diagonal steps around the closed contour.
pub fn step_counts(contour: &[(i64, i64)]) -> (usize, usize) {
    if contour.len() < 2 {
        return (0, 0);
    }
    let mut straight = 0;
    let mut diagonal = 0;
    for (i, &a) in contour.iter().enumerate() {
        let b = contour[(i + 1) % contour.len()];
        let (dx, dy) = ((b.0 - a.0).abs(), (b.1 - a.1).abs());
        if dx + dy == 2 {
            diagonal += 1;
        } else {
            straight += dx.max(dy) as usize;
        }
    }
    (straight, diagonal)
}
