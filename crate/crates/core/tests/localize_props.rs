mod common;

use proptest::prelude::*;
use rialscan_core::eval::crop_coverage;
use rialscan_core::localize::{
    area_spread, candidate_lines, count_zeros, group_regions, line_angle, select_zero_line, Line, LineCandidate, Region,
};
use rialscan_core::{
    close, generate_sample, label_components, rotation_angle, run_pipeline, BinaryImage, Component, Connectivity,
    Denomination, PipelineConfig, StructuringElement, SynthSpec, ZeroLine,
};

/// Square blobs of side `2r + 1` centred at `centers`.
fn dots(w: usize, h: usize, centers: &[(usize, usize)], r: usize) -> BinaryImage {
    BinaryImage::from_fn(w, h, |x, y| centers.iter().any(|&(cx, cy)| x.abs_diff(cx) <= r && y.abs_diff(cy) <= r))
}

fn components(img: &BinaryImage) -> Vec<Component> {
    label_components(img, Connectivity::Eight).components().to_vec()
}

fn regions_after_closing(img: &BinaryImage, se: &StructuringElement) -> Vec<Region> {
    let pre = label_components(img, Connectivity::Eight);
    let post = label_components(&close(img, se), Connectivity::Eight);
    group_regions(&pre, &post)
}

fn labels(members: &[Component]) -> Vec<u32> {
    let mut l: Vec<u32> = members.iter().map(|c| c.label).collect();
    l.sort_unstable();
    l
}

/// Every pair of centroids, members with any pixel within `tol` of the
/// line, keep the largest set (first found on ties).
fn exhaustive_best(members: &[Component], tol: f64) -> usize {
    let mut best = 0;
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            let (a, b) = (members[i].centroid, members[j].centroid);
            let len = (b.0 - a.0).hypot(b.1 - a.1);
            if len == 0.0 {
                continue;
            }
            let on = members
                .iter()
                .filter(|m| {
                    m.pixels().iter().any(|&(x, y)| {
                        let cross = (b.0 - a.0) * (y as f64 - a.1) - (b.1 - a.1) * (x as f64 - a.0);
                        cross.abs() / len <= tol
                    })
                })
                .count();
            best = best.max(on);
        }
    }
    best
}

#[test]
fn grouping_examples() {
    let se = StructuringElement::rect(7, 3).unwrap();
    let four = dots(60, 20, &[(10, 10), (18, 10), (26, 10), (34, 10)], 2);
    let regions = regions_after_closing(&four, &se);
    assert_eq!(regions.len(), 1);
    assert_eq!(regions[0].members.len(), 4);

    let two = dots(60, 20, &[(10, 10), (18, 10)], 2);
    assert!(regions_after_closing(&two, &se).is_empty());

    let six = dots(80, 20, &[(8, 10), (16, 10), (24, 10), (32, 10), (40, 10), (48, 10)], 2);
    assert_eq!(regions_after_closing(&six, &se)[0].members.len(), 6);
}

#[test]
fn collinear_triple_is_on_line() {
    let img = dots(40, 20, &[(5, 10), (15, 10), (25, 10)], 1);
    let region = Region { id: 1, members: components(&img) };
    assert_eq!(candidate_lines(&region, 1.5).unwrap().on_line.len(), 3);
}

#[test]
fn right_triangle_of_points_keeps_two() {
    let img = dots(30, 30, &[(5, 5), (25, 5), (5, 25)], 0);
    let members = components(&img);
    let best = candidate_lines(&Region { id: 1, members: members.clone() }, 1.5).unwrap();
    assert_eq!(best.on_line.len(), 2);
    assert_eq!(best.on_line.len(), exhaustive_best(&members, 1.5));
}

#[test]
fn off_line_member_is_pruned() {
    let img = dots(60, 40, &[(5, 10), (15, 10), (25, 10), (35, 10), (20, 30)], 1);
    let members = components(&img);
    let best = candidate_lines(&Region { id: 1, members: members.clone() }, 1.5).unwrap();
    assert_eq!(best.on_line.len(), 4);
    assert_eq!(best.on_line.len(), exhaustive_best(&members, 1.5));
    assert!(best.on_line.iter().all(|c| (c.centroid.1 - 10.0).abs() < 1e-9));
}

#[test]
fn coincident_centroids_are_degenerate() {
    // Concentric rings share a centroid.
    let rings = BinaryImage::from_fn(21, 21, |x, y| {
        let d = x.abs_diff(10).max(y.abs_diff(10));
        d == 2 || d == 5 || d == 8
    });
    let members = components(&rings);
    assert_eq!(members.len(), 3);
    let err = candidate_lines(&Region { id: 4, members }, 1.5).unwrap_err();
    assert_eq!(err.kind(), "DegenerateRegion");
}

fn candidate(region_id: u32, sides: &[usize]) -> LineCandidate {
    let mut x = 2;
    let mut centers = Vec::new();
    for &s in sides {
        centers.push((x, s));
        x += s + 3;
    }
    let img = BinaryImage::from_fn(x + 2, 40, |px, py| {
        centers.iter().zip(sides).any(|(&(cx, _), &s)| (cx..cx + s).contains(&px) && (2..2 + s).contains(&py))
    });
    let on_line = components(&img);
    let line = Line::through(on_line[0].centroid, on_line[1].centroid).unwrap();
    LineCandidate { region_id, anchors: (on_line[0].label, on_line[1].label), on_line, line }
}

#[test]
fn selection_examples() {
    // Areas {100, 100, 100} against {100, 36, 169}.
    let even = candidate(1, &[10, 10, 10]);
    let uneven = candidate(2, &[10, 6, 13]);
    assert_eq!(select_zero_line(&[uneven.clone(), even.clone()]).unwrap().region_id, 1);
    assert_eq!(select_zero_line(&[uneven]).unwrap().region_id, 2);
    let six = candidate(3, &[5; 6]);
    assert_eq!(select_zero_line(&[six.clone(), six]).unwrap_err().kind(), "TooManyZeros");
    assert_eq!(select_zero_line(&[]).unwrap_err().kind(), "NoCandidates");
}

#[test]
fn angle_examples() {
    assert_eq!(line_angle((10.0, 10.0), (20.0, 10.0)), 0.0);
    assert_eq!(line_angle((10.0, 10.0), (20.0, 20.0)), 45.0);
    assert_eq!(line_angle((0.0, 0.0), (10.0, -10.0)), -45.0);
    assert_eq!(line_angle((20.0, 10.0), (10.0, 10.0)), 0.0);
    assert_eq!(line_angle((0.0, 0.0), (0.0, 5.0)), 90.0);
    assert_eq!(line_angle((0.0, 5.0), (0.0, 0.0)), 90.0);

    let img = dots(60, 60, &[(10, 10), (20, 20), (30, 30)], 1);
    let members = components(&img);
    let line = Line::through(members[0].centroid, members[2].centroid).unwrap();
    let z = ZeroLine::new(1, members, line).unwrap();
    assert!((rotation_angle(&z) - 45.0).abs() < 1e-9);
    assert_eq!(count_zeros(&z), 3);
}

fn read(spec: &SynthSpec) -> (Option<ZeroLine>, f64) {
    let (img, truth) = generate_sample(spec);
    let (trace, _) = run_pipeline(&img, &PipelineConfig::default(), None);
    let cover = match (&trace.crop, &trace.rotation) {
        (Some(c), Some(r)) => crop_coverage(c, r, &truth.digit_box),
        _ => 0.0,
    };
    (trace.zero_line, cover)
}

#[test]
fn zero_count_of_synthetic_layouts() {
    for (value, zeros) in [(1000, 3), (10000, 4), (100000, 5)] {
        let spec = SynthSpec::new(Denomination::from_value(value).unwrap(), 1);
        let (z, _) = read(&spec);
        assert_eq!(z.map(|z| count_zeros(&z)), Some(zeros), "{value}");
    }
}

#[test]
fn angle_follows_rotation() {
    for (i, d) in Denomination::ALL.iter().enumerate() {
        let base = SynthSpec { rotation: 3.0, ..SynthSpec::new(*d, 40 + i as u64) };
        let (z0, _) = read(&base);
        let z0 = z0.expect("base image localizes");
        for theta in [-25.0, -10.0, 10.0, 25.0] {
            let spec = SynthSpec { rotation: base.rotation + theta, ..base };
            let (z, _) = read(&spec);
            let z = z.unwrap_or_else(|| panic!("{d} at {theta}°"));
            let diff = rotation_angle(&z) - (rotation_angle(&z0) + theta);
            assert!(diff.abs() <= 1.5, "{d} at {theta}°: off by {diff:.2}°");
            assert_eq!(z.count, z0.count, "{d} at {theta}°");
        }
    }
}

#[test]
fn zero_count_and_digit_stable_across_scale() {
    for (i, d) in Denomination::ALL.iter().enumerate() {
        for scale in [0.5, 0.75, 1.0, 1.25, 1.5] {
            let spec = SynthSpec { scale, rotation: -8.0, ..SynthSpec::new(*d, 60 + i as u64) };
            let (z, cover) = read(&spec);
            assert_eq!(z.map(|z| z.count), Some(d.zeros()), "{d} at scale {scale}");
            assert!(cover >= 0.5, "{d} at scale {scale}: digit coverage {cover:.2}");
        }
    }
}

proptest! {
    #[test]
    fn line_search_ignores_member_order(
        pts in prop::collection::vec((0usize..40, 0usize..40), 3..8),
        perm_seed in any::<u64>(),
    ) {
        let img = BinaryImage::from_fn(42, 42, |x, y| pts.iter().any(|&(px, py)| (x, y) == (px, py)));
        let mut members = components(&img);
        prop_assume!(members.len() >= 3);
        let a = candidate_lines(&Region { id: 1, members: members.clone() }, 1.5);
        use rand::seq::SliceRandom;
        members.shuffle(&mut common::rng(perm_seed));
        let b = candidate_lines(&Region { id: 1, members }, 1.5);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(labels(&a.on_line), labels(&b.on_line)),
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn selection_ignores_area_scale(
        sides in prop::collection::vec(prop::collection::vec(3usize..9, 3..=5), 1..4),
        k in 2usize..4,
    ) {
        let cands: Vec<LineCandidate> =
            sides.iter().enumerate().map(|(i, s)| candidate(i as u32 + 1, s)).collect();
        let scaled: Vec<LineCandidate> = sides
            .iter()
            .enumerate()
            .map(|(i, s)| candidate(i as u32 + 1, &s.iter().map(|v| v * k).collect::<Vec<_>>()))
            .collect();
        // Equal spreads may round apart after scaling; skip near-ties.
        let spreads: Vec<f64> = cands.iter().map(|c| area_spread(&c.on_line)).collect();
        prop_assume!(spreads.iter().enumerate().all(|(i, a)| spreads[i + 1..].iter().all(|b| (a - b).abs() > 1e-9)));
        let a = select_zero_line(&cands).map(|z| z.region_id).ok();
        let b = select_zero_line(&scaled).map(|z| z.region_id).ok();
        prop_assert_eq!(a, b);
    }
}
