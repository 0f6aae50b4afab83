mod common;

use proptest::prelude::*;
use rand::Rng;
use rialscan_core::{close, dilate, erode, label_components, BinaryImage, Connectivity, StructuringElement};

fn random_se(rng: &mut impl Rng) -> StructuringElement {
    let (w, h) = (2 * rng.random_range(0..4) + 1, 2 * rng.random_range(0..4) + 1);
    let mut mask: Vec<bool> = (0..w * h).map(|_| rng.random_bool(0.6)).collect();
    mask[(h / 2) * w + w / 2] = true;
    StructuringElement::new(w, h, mask).unwrap()
}

fn full(n: usize) -> StructuringElement {
    StructuringElement::rect(n, n).unwrap()
}

#[test]
fn erosion_examples() {
    let white = BinaryImage::filled(6, 5, true);
    let out = erode(&white, &full(3));
    for y in 0..5 {
        for x in 0..6 {
            let border = x == 0 || y == 0 || x == 5 || y == 4;
            assert_eq!(out.get(x, y), !border, "({x}, {y})");
        }
    }
    let dot = BinaryImage::from_fn(5, 5, |x, y| (x, y) == (2, 2));
    assert_eq!(erode(&dot, &full(3)).count_foreground(), 0);
}

#[test]
fn dilation_examples() {
    let dot = BinaryImage::from_fn(5, 5, |x, y| (x, y) == (2, 2));
    let expected = BinaryImage::from_fn(5, 5, |x, y| (1..=3).contains(&x) && (1..=3).contains(&y));
    assert_eq!(dilate(&dot, &full(3)), expected);
    let black = BinaryImage::filled(7, 4, false);
    assert_eq!(dilate(&black, &full(5)), black);
}

#[test]
fn unit_element_is_identity() {
    let mut rng = common::rng(3);
    let unit = full(1);
    for _ in 0..20 {
        let img = common::random_binary(&mut rng, 13, 9, 0.5);
        assert_eq!(erode(&img, &unit), img);
        assert_eq!(dilate(&img, &unit), img);
        assert_eq!(close(&img, &unit), img);
    }
}

#[test]
fn closing_bridges_two_pixel_gap() {
    let img =
        BinaryImage::from_fn(12, 7, |x, y| (2..=4).contains(&y) && ((1..=3).contains(&x) || (6..=8).contains(&x)));
    assert_eq!(label_components(&img, Connectivity::Eight).len(), 2);
    let closed = close(&img, &full(5));
    assert_eq!(label_components(&closed, Connectivity::Eight).len(), 1);
}

#[test]
fn even_or_originless_elements_rejected() {
    assert_eq!(StructuringElement::rect(4, 3).unwrap_err().kind(), "EvenSide");
    let mut mask = vec![true; 9];
    mask[4] = false;
    assert_eq!(StructuringElement::new(3, 3, mask).unwrap_err().kind(), "OriginUnset");
}

#[test]
fn closing_is_idempotent_and_extensive() {
    let mut rng = common::rng(21);
    for i in 0..100 {
        let img = common::random_binary(&mut rng, 24, 24, 0.35);
        let se = random_se(&mut rng);
        let once = close(&img, &se);
        assert!(common::subset(&img, &once), "extensivity, image {i}");
        assert_eq!(close(&once, &se), once, "idempotence, image {i}");
    }
}

#[test]
fn erosion_is_dual_to_dilation_inside() {
    let mut rng = common::rng(22);
    for i in 0..100 {
        let img = common::random_binary(&mut rng, 24, 24, 0.6);
        let se = random_se(&mut rng);
        let eroded = erode(&img, &se);
        let dual = dilate(&img.complement(), &se.reflect()).complement();
        let (rx, ry) = (se.width() / 2, se.height() / 2);
        for y in ry..24 - ry {
            for x in rx..24 - rx {
                assert_eq!(eroded.get(x, y), dual.get(x, y), "image {i} at ({x}, {y})");
            }
        }
    }
}

#[test]
fn erosion_and_dilation_are_monotone() {
    let mut rng = common::rng(23);
    for i in 0..100 {
        let small = common::random_binary(&mut rng, 24, 24, 0.4);
        let extra = common::random_binary(&mut rng, 24, 24, 0.3);
        let big = BinaryImage::from_fn(24, 24, |x, y| small.get(x, y) || extra.get(x, y));
        let se = random_se(&mut rng);
        assert!(common::subset(&dilate(&small, &se), &dilate(&big, &se)), "dilate, image {i}");
        assert!(common::subset(&erode(&small, &se), &erode(&big, &se)), "erode, image {i}");
    }
}

proptest! {
    #[test]
    fn erosion_shrinks_and_dilation_grows(seed in any::<u64>(), p in 0.1f64..0.9) {
        let mut rng = common::rng(seed);
        let img = common::random_binary(&mut rng, 16, 16, p);
        let se = random_se(&mut rng);
        prop_assert!(common::subset(&erode(&img, &se), &img));
        prop_assert!(common::subset(&img, &dilate(&img, &se)));
    }
}
