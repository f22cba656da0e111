use lowrank_impulse::lowrank::plr_denoise_guided;
use lowrank_impulse::patch::{
    block_match, build_similarity_matrix, finalize, reference_grid, scatter_group,
    AggregationBuffer, SimilarityGroup,
};
use lowrank_impulse::rng::SplitMix64;
use lowrank_impulse::{GrayImage, PatchGeometry};

fn random_image(width: usize, height: usize, levels: u64, seed: u64) -> GrayImage {
    let mut rng = SplitMix64::new(seed);
    GrayImage::from_fn(width, height, |_, _| (rng.next_u64() % levels) as f64).unwrap()
}

fn brute_force_match(
    img: &GrayImage,
    reference: (usize, usize),
    g: &PatchGeometry,
) -> Vec<(usize, usize)> {
    let d = g.patch;
    let center = |s: usize| s + (d - 1) / 2;
    let (cr, cc) = (center(reference.0) as i64, center(reference.1) as i64);
    let lo = (g.window as i64 - 1) / 2;
    let hi = g.window as i64 / 2;
    let inside = |r: i64, c: i64| r >= cr - lo && r <= cr + hi && c >= cc - lo && c <= cc + hi;

    let mut scored = Vec::new();
    for r in 0..=img.height() - d {
        for c in 0..=img.width() - d {
            let (r2, c2) = ((r + d - 1) as i64, (c + d - 1) as i64);
            if !(inside(r as i64, c as i64) && inside(r2, c2)) || (r, c) == reference {
                continue;
            }
            let mut dist = 0.0;
            for i in 0..d {
                for j in 0..d {
                    let e = img.get(r + i, c + j) - img.get(reference.0 + i, reference.1 + j);
                    dist += e * e;
                }
            }
            scored.push((dist, (r, c)));
        }
    }
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    std::iter::once(reference)
        .chain(scored.into_iter().take(g.group - 1).map(|(_, p)| p))
        .collect()
}

#[test]
fn block_match_agrees_with_exhaustive_scan() {
    let mut rng = SplitMix64::new(99);
    for case in 0..120u64 {
        let w = 12 + (rng.next_u64() % 20) as usize;
        let h = 12 + (rng.next_u64() % 20) as usize;
        let d = 2 + (rng.next_u64() % 4) as usize;
        let window = d + 4 + (rng.next_u64() % 8) as usize;
        // few levels so that distance ties are common
        let img = random_image(w, h, 1 + case % 5, case);
        let r = (rng.next_u64() as usize) % (h - d + 1);
        let c = (rng.next_u64() as usize) % (w - d + 1);
        let g = PatchGeometry::new(d, window, 1, 1).unwrap();
        let all = brute_force_match(
            &img,
            (r, c),
            &PatchGeometry {
                group: usize::MAX,
                ..g
            },
        );
        let group = all.len().min(1 + (rng.next_u64() % 30) as usize);
        let g = PatchGeometry { group, ..g };
        let got = block_match(&img, (r, c), &g).unwrap();
        assert_eq!(got, brute_force_match(&img, (r, c), &g), "case {case}");
    }
}

#[test]
fn block_match_small_example() {
    let img = random_image(20, 20, 256, 5);
    let g = PatchGeometry::new(3, 9, 10, 1).unwrap();
    let members = block_match(&img, (8, 8), &g).unwrap();
    assert_eq!(members.len(), 10);
    assert_eq!(members[0], (8, 8));
    assert_eq!(members, brute_force_match(&img, (8, 8), &g));
    for &(r, c) in &members {
        assert!((5..=11).contains(&r) && (5..=11).contains(&c));
    }
}

#[test]
fn similarity_matrix_matches_direct_indexing() {
    let img = random_image(17, 13, 256, 8);
    let members = vec![(0, 0), (3, 9), (8, 2), (10, 12)];
    let d = 3;
    let s = build_similarity_matrix(&img, &members, d).unwrap();
    assert_eq!(s.shape(), (9, 4));
    for (j, &(r, c)) in members.iter().enumerate() {
        for k in 0..d * d {
            assert_eq!(s[(k, j)], img.get(r + k % d, c + k / d));
        }
    }
}

#[test]
fn scatter_matches_accumulation_oracle() {
    let img = random_image(24, 21, 256, 3);
    let g = PatchGeometry::new(4, 11, 9, 3).unwrap();
    let mut rng = SplitMix64::new(17);
    let mut buf = AggregationBuffer::new(24, 21);
    let mut sum = vec![0.0; 24 * 21];
    let mut count = vec![0u32; 24 * 21];
    for reference in reference_grid(24, 21, &g).unwrap() {
        let group = SimilarityGroup::gather(&img, &img, reference, &g).unwrap();
        let estimate = group.matrix.map(|v| v + rng.next_f64() - 0.5);
        scatter_group(&group, &estimate, &mut buf).unwrap();
        for (j, &(r, c)) in group.members.iter().enumerate() {
            for k in 0..16 {
                let idx = (r + k % 4) * 24 + c + k / 4;
                sum[idx] += estimate[(k, j)];
                count[idx] += 1;
            }
        }
    }
    assert_eq!(buf.count(), &count[..]);
    let out = finalize(&buf).unwrap();
    for i in 0..sum.len() {
        let mean = sum[i] / f64::from(count[i]);
        assert!((out.pixels()[i] - mean).abs() < 1e-9);
        assert!((buf.sum()[i] - sum[i]).abs() < 1e-9);
    }
}

#[test]
fn scattering_unchanged_groups_reproduces_input() {
    let mut rng = SplitMix64::new(4);
    let img = GrayImage::from_fn(50, 47, |_, _| rng.next_f64() * 300.0 - 20.0).unwrap();
    let g = PatchGeometry::default();
    let mut buf = AggregationBuffer::new(50, 47);
    for reference in reference_grid(50, 47, &g).unwrap() {
        let group = SimilarityGroup::gather(&img, &img, reference, &g).unwrap();
        scatter_group(&group, &group.matrix, &mut buf).unwrap();
    }
    assert_eq!(finalize(&buf).unwrap(), img);
}

#[test]
fn default_grid_covers_every_pixel() {
    let g = PatchGeometry::default();
    for (w, h) in [(43, 43), (44, 51), (61, 43), (100, 77)] {
        let mut covered = vec![false; w * h];
        for (r, c) in reference_grid(w, h, &g).unwrap() {
            for i in 0..g.patch {
                for j in 0..g.patch {
                    covered[(r + i) * w + c + j] = true;
                }
            }
        }
        assert!(covered.iter().all(|&x| x), "{w}x{h}");
    }
}

#[test]
fn aggregation_is_identical_across_thread_counts() {
    let img = random_image(64, 64, 256, 12);
    let g = PatchGeometry::new(5, 17, 30, 2).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| plr_denoise_guided(&img, &img, &g, 20.0).unwrap())
    };
    let single = run(1);
    for threads in [2, 4, 7] {
        assert_eq!(run(threads), single, "{threads} threads");
    }
}
