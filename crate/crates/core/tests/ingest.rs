mod common;

use std::collections::BTreeMap;

use graspmap::geometry::DepthMap;
use graspmap::ingest::mask::{decode_pgm, encode_pgm};
use graspmap::ingest::{
    calibrate_confidence, calibrate_confidence_with, filter_mask, init_confidence_map, load_proposals,
    valid_region_ratio, BBox, Calibration, MaskImage, Scene, Stage,
};
use graspmap::Error;
use proptest::prelude::*;

const DOC: &str = r#"{
  "object_id": "mug",
  "intents": [
    {"intent_id": 0, "part_name": "handle", "description": "loop on the side",
     "views": [
       {"view_id": 0, "visible": true, "bbox": [2, 2, 10, 10], "confidence": 1.4},
       {"view_id": 1, "bbox": [0, 0, 4, 4], "confidence": 0.5},
       {"view_id": 2, "visible": true, "bbox": [5, 5, 5, 9], "confidence": 0.7}
     ]},
    {"intent_id": 1, "part_name": "body",
     "views": [
       {"view_id": 0, "visible": false, "bbox": [0, 0, 8, 8], "confidence": -0.2}
     ]},
    {"intent_id": 2, "part_name": "rim",
     "views": [
       {"view_id": 1, "confidence": 0.3}
     ]}
  ]
}"#;

#[test]
fn proposals_are_cleaned_on_load() {
    let set = load_proposals(DOC, "doc").unwrap();
    assert_eq!(set.object_id, "mug");
    assert_eq!(set.intent_ids(), vec![0, 1]);
    let handle = set.intent(0).unwrap();
    assert_eq!(handle.views.len(), 2);
    assert_eq!(handle.views[0].confidence, 1.0);
    assert!(handle.views[1].visible);
    assert!(handle.entry(2).is_none());
    let body = set.intent(1).unwrap();
    assert_eq!(body.views[0].confidence, 0.0);
    assert!(body.visible_entry(0).is_none());
    assert!(set.warnings.iter().any(|w| w.contains("intent 2")));
}

#[test]
fn unusual_intent_counts_only_warn() {
    let one = r#"{"object_id": "x", "intents": [
        {"intent_id": 0, "part_name": "a", "views": [{"view_id": 0, "bbox": [0,0,2,2], "confidence": 0.5}]}]}"#;
    let set = load_proposals(one, "one").unwrap();
    assert_eq!(set.intents.len(), 1);
    assert!(set.warnings.iter().any(|w| w.contains("expected between 2 and 4")));
}

#[test]
fn proposal_errors() {
    let empty = r#"{"object_id": "x", "intents": [
        {"intent_id": 0, "part_name": "a", "views": [{"view_id": 0, "confidence": 0.5}]}]}"#;
    assert!(matches!(load_proposals(empty, "e"), Err(Error::EmptyProposal)));
    let dup = r#"{"object_id": "x", "intents": [
        {"intent_id": 0, "part_name": "a", "views": []},
        {"intent_id": 0, "part_name": "b", "views": []}]}"#;
    let err = load_proposals(dup, "dup.json").unwrap_err().to_string();
    assert!(err.contains("dup.json") && err.contains("duplicate"), "{err}");
    let unknown = r#"{"object_id": "x", "intents": [], "extra": 1}"#;
    assert!(matches!(load_proposals(unknown, "u"), Err(Error::Parse { .. })));
}

#[test]
fn filter_keeps_mask_pixels_with_depth() {
    let depth = DepthMap::new(3, 1, vec![0.5, f64::NAN, 0.7]).unwrap();
    let mask = MaskImage::new(3, 1, vec![true, true, false]).unwrap();
    let f = filter_mask(&mask, &depth).unwrap();
    assert_eq!(f.data(), &[true, false, false]);
    assert!(f.is_subset_of(&mask));
    assert!(matches!(filter_mask(&MaskImage::empty(2, 1), &depth), Err(Error::Shape(_))));
}

#[test]
fn region_ratio_counts_pixels_in_the_box() {
    // 10x10 box with 37 member pixels inside and a few outside
    let mut mask = MaskImage::empty(20, 20);
    let mut placed = 0;
    for row in 5..15 {
        for col in 5..15 {
            if placed < 37 {
                mask.set(col, row, true);
                placed += 1;
            }
        }
    }
    mask.set(0, 0, true);
    mask.set(19, 19, true);
    let bbox = BBox::new(5.0, 5.0, 15.0, 15.0);
    assert_eq!(valid_region_ratio(&mask, &bbox).unwrap(), 0.37);

    let full = MaskImage::from_fn(20, 20, |_, _| true);
    assert_eq!(valid_region_ratio(&full, &bbox).unwrap(), 1.0);
    assert_eq!(valid_region_ratio(&MaskImage::empty(20, 20), &bbox).unwrap(), 0.0);
    assert!(matches!(
        valid_region_ratio(&mask, &BBox::new(3.0, 3.0, 3.0, 8.0)),
        Err(Error::DegenerateBox(..))
    ));
}

#[test]
fn box_hanging_off_the_image_keeps_its_full_area() {
    let full = MaskImage::from_fn(4, 4, |_, _| true);
    let ratio = valid_region_ratio(&full, &BBox::new(2.0, 0.0, 6.0, 4.0)).unwrap();
    assert_eq!(ratio, 0.5);
}

#[test]
fn calibration_is_logistic_of_the_ratio() {
    let sigma1 = 1.0 / (1.0 + (-1.0f64).exp());
    assert_eq!(calibrate_confidence(0.8, 1.0), 0.8 * sigma1);
    assert!((calibrate_confidence(0.8, 1.0) - 0.584_846_862_9).abs() < 1e-10);
    assert_eq!(calibrate_confidence(1.0, 0.0), 0.5);
    // inputs are clipped first
    assert_eq!(calibrate_confidence(2.0, 3.0), sigma1);
    let cal = Calibration { scale: 10.0, bias: 0.5 };
    assert_eq!(calibrate_confidence_with(1.0, 0.5, &cal), 0.5);
    assert!(calibrate_confidence_with(1.0, 0.9, &cal) > 0.98);
}

#[test]
fn initial_map_is_cbar_on_mask() {
    let mask = MaskImage::new(2, 2, vec![true, false, false, true]).unwrap();
    let map = init_confidence_map(3, &mask, 0.6);
    assert_eq!(map.view_id, 3);
    assert_eq!(map.stage, Stage::Initial);
    assert_eq!(map.scores, vec![0.6, 0.0, 0.0, 0.6]);
    assert_eq!(map.nonzero_count(), 2);
}

#[test]
fn pgm_round_trip_and_threshold() {
    let mask = MaskImage::from_fn(5, 3, |c, r| (c + r) % 2 == 0);
    assert_eq!(decode_pgm(&encode_pgm(&mask), "mem").unwrap(), mask);
    let mut bytes = b"P5\n# comment\n2 1\n255\n".to_vec();
    bytes.extend([127u8, 128]);
    let m = decode_pgm(&bytes, "half").unwrap();
    assert_eq!(m.data(), &[false, true]);
    assert!(decode_pgm(b"P5\n2 2\n255\n\x00", "short").is_err());
}

#[test]
fn scene_inputs_for_visible_and_hidden_views() {
    let (mesh, views) = common::two_view_sphere(32);
    let mut scene = common::silhouette_scene(mesh, views, 0.9);
    scene.proposals.intents[0].views[1].visible = false;
    let inputs = scene.prepare_intent(0, &Calibration::default()).unwrap();
    let (a, b) = (&inputs.views[0], &inputs.views[1]);
    assert!(a.rho.unwrap() > 0.5 && a.rho.unwrap() <= 1.0);
    assert_eq!(a.cbar, calibrate_confidence(0.9, a.rho.unwrap()));
    assert_eq!(a.initial.nonzero_count(), a.filtered.count());
    assert!(b.rho.is_none());
    assert_eq!(b.initial.nonzero_count(), 0);
    assert!(scene.prepare_intent(7, &Calibration::default()).is_err());
}

#[test]
fn missing_mask_is_reported() {
    let (mesh, views) = common::two_view_sphere(16);
    let scene = common::silhouette_scene(mesh, views, 0.9);
    let stripped = Scene::new(scene.mesh.clone(), scene.views.clone(), scene.proposals.clone(), BTreeMap::new()).unwrap();
    assert!(matches!(
        stripped.prepare_intent(0, &Calibration::default()),
        Err(Error::MissingMask { view_id: 0, intent_id: 0 })
    ));
}

proptest! {
    #[test]
    fn ratio_ignores_pixels_outside_the_box(bits in proptest::collection::vec(any::<bool>(), 144), x0 in 0usize..6, y0 in 0usize..6) {
        let mask = MaskImage::new(12, 12, bits).unwrap();
        let bbox = BBox::new(x0 as f64, y0 as f64, x0 as f64 + 5.0, y0 as f64 + 4.0);
        let inside = |c: usize, r: usize| c >= x0 && c < x0 + 5 && r >= y0 && r < y0 + 4;
        let cleared = MaskImage::from_fn(12, 12, |c, r| mask.get(c, r) && inside(c, r));
        let ratio = valid_region_ratio(&mask, &bbox).unwrap();
        prop_assert_eq!(ratio, valid_region_ratio(&cleared, &bbox).unwrap());
        prop_assert!((0.0..=1.0).contains(&ratio));
        prop_assert_eq!(ratio, cleared.count() as f64 / 20.0);
    }

    #[test]
    fn calibrated_confidence_stays_in_range(c in -1.0f64..2.0, rho in -1.0f64..2.0) {
        let v = calibrate_confidence(c, rho);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!(v <= c.clamp(0.0, 1.0));
    }
}
