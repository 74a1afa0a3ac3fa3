mod common;

use common::{integrate_ordered_pair, integrate_radial};
use hetnet_coop::association::{ordered_distance_pdf, serving_distance_pdf, AssociationEvent, OrderedDistances};
use hetnet_coop::model::{Scenario, Strategy};

fn scenarios() -> Vec<Scenario> {
    let mut out: Vec<Scenario> = Strategy::ALL.iter().map(|s| s.apply(&Scenario::baseline())).collect();
    out.push(Scenario::baseline().with_density_ratio(0.5).with_bias_ratio(3.0));
    out
}

#[test]
fn scalar_serving_distance_pdfs_integrate_to_one() {
    for sc in scenarios() {
        for event in [
            AssociationEvent::MacroNonCoop,
            AssociationEvent::SmallNonCoop,
            AssociationEvent::MacroCoop,
        ] {
            let pdf = serving_distance_pdf(event, &sc).unwrap();
            let scale = 1.0 / sc.macro_tier.density.sqrt();
            let total = integrate_radial(|r| pdf.density(r).unwrap(), scale);
            assert!((total - 1.0).abs() < 1e-6, "{event:?}: {total}");
        }
    }
}

#[test]
fn cluster_joint_pdf_integrates_to_one() {
    for sc in scenarios() {
        let pdf = serving_distance_pdf(AssociationEvent::Cluster, &sc).unwrap();
        let total = integrate_ordered_pair(
            |r1, r2| pdf.joint_density(&OrderedDistances::new(vec![r1, r2]).unwrap()).unwrap(),
            1.0 / sc.small_tier.density.sqrt(),
        );
        assert!((total - 1.0).abs() < 1e-4, "{total}");
    }
}

#[test]
fn ordered_distance_pdf_normalizes() {
    let sc = Scenario::baseline();
    let total = integrate_ordered_pair(
        |r1, r2| ordered_distance_pdf(&sc, &OrderedDistances::new(vec![r1, r2]).unwrap()),
        1.0 / sc.small_tier.density.sqrt(),
    );
    assert!((total - 1.0).abs() < 1e-6, "{total}");
}
