use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_distr::StandardNormal;

use super::*;
use crate::panel::{haversine_km, GeoPoint};

fn meta(country: &str, centroid: Option<(f64, f64)>, groups: &[&str]) -> RegionMeta {
    RegionMeta {
        country: country.into(),
        centroid: centroid.map(|(lat, lon)| GeoPoint::new(lat, lon).unwrap()),
        groups: groups.iter().map(|g| g.to_string()).collect::<BTreeSet<_>>(),
    }
}

fn panel_from(series: &[(&str, RegionMeta, Vec<Option<f64>>)]) -> ResidualPanel {
    let mut values = BTreeMap::new();
    let mut metas = BTreeMap::new();
    for (r, m, s) in series {
        for (t, v) in s.iter().enumerate() {
            if let Some(v) = v {
                values.insert((r.to_string(), 2000 + t as i32), *v);
            }
        }
        metas.insert(r.to_string(), m.clone());
    }
    ResidualPanel::new(values, metas).unwrap()
}

fn wave(n: usize) -> Vec<f64> {
    (0..n).map(|t| (t as f64 * 0.7).sin() + 0.1 * t as f64).collect()
}

#[test]
fn identical_and_negated_series() {
    let a: Vec<Option<f64>> = wave(15).into_iter().map(Some).collect();
    let neg: Vec<Option<f64>> = a.iter().map(|v| v.map(|x| -x)).collect();
    let p = panel_from(&[
        ("A", meta("c", None, &[]), a.clone()),
        ("B", meta("c", None, &[]), a.clone()),
        ("C", meta("c", None, &[]), neg),
    ]);
    let out = spatial_pair_correlations(&p, &RegionPairFilter::All, DEFAULT_MIN_OVERLAP);
    let get = |x: &str, y: &str| out.pairs.iter().find(|q| q.a == x && q.b == y).unwrap().rho;
    assert!((get("A", "B") - 1.0).abs() < 1e-12);
    assert!((get("A", "C") + 1.0).abs() < 1e-12);
    assert_eq!(out.pairs.len(), 3);
    assert!(out.pairs.iter().all(|q| q.overlap == 15 && q.a < q.b));
}

#[test]
fn skips_short_overlap_and_degenerate() {
    let long: Vec<Option<f64>> = wave(12).into_iter().map(Some).collect();
    let mut short = long.clone();
    for v in short.iter_mut().skip(5) {
        *v = None;
    }
    let flat = vec![Some(1.0); 12];
    let p = panel_from(&[
        ("A", meta("c", None, &[]), long),
        ("B", meta("c", None, &[]), short),
        ("C", meta("c", None, &[]), flat),
    ]);
    let out = spatial_pair_correlations(&p, &RegionPairFilter::All, DEFAULT_MIN_OVERLAP);
    assert!(out.pairs.is_empty());
    assert_eq!(out.skipped.short_overlap, 2);
    assert_eq!(out.skipped.degenerate, 1);
}

#[test]
fn identical_cross_sections_and_consecutive_count() {
    let mut rng = crate::rng::rng(1);
    let cross: Vec<f64> = (0..12).map(|_| rng.sample(StandardNormal)).collect();
    let series: Vec<(String, Vec<Option<f64>>)> = (0..12)
        .map(|r| (format!("R{r:02}"), (0..20).map(|t| Some(if t < 2 { cross[r] } else { rng.sample(StandardNormal) })).collect()))
        .collect();
    let rows: Vec<(&str, RegionMeta, Vec<Option<f64>>)> =
        series.iter().map(|(r, s)| (r.as_str(), meta("c", None, &[]), s.clone())).collect();
    let p = panel_from(&rows);
    let cons = temporal_pair_correlations(&p, YearPairFilter::Consecutive, DEFAULT_MIN_OVERLAP);
    assert_eq!(cons.pairs.len(), 19);
    assert!((cons.pairs[0].rho - 1.0).abs() < 1e-12);
    assert_eq!((cons.pairs[0].a.as_str(), cons.pairs[0].b.as_str()), ("2000", "2001"));
    let all = temporal_pair_correlations(&p, YearPairFilter::All, DEFAULT_MIN_OVERLAP);
    assert_eq!(all.pairs.len(), 190);
}

#[test]
fn summaries_by_hand() {
    let s = summarize("g", CorrelationKind::Spatial, &[1.0, 1.0, 1.0]).unwrap();
    assert_eq!((s.mean, s.q25, s.q75, s.pair_count), (1.0, 1.0, 1.0, 3));
    let s = summarize("g", CorrelationKind::Spatial, &[1.0, -1.0, 0.0]).unwrap();
    assert_eq!((s.mean, s.q25, s.q75), (0.0, -0.5, 0.5));
    assert!(summarize("g", CorrelationKind::Temporal, &[]).is_none());
}

#[test]
fn summary_of_uniform_draws() {
    // U(-1, 1): mean 0, quartiles -0.5 and 0.5, sampling sd of each about 0.01
    let mut rng = crate::rng::rng(7);
    let draws: Vec<f64> = (0..10_000).map(|_| rng.random_range(-1.0..1.0)).collect();
    let s = summarize("u", CorrelationKind::Spatial, &draws).unwrap();
    assert!(s.mean.abs() < 0.04);
    assert!((s.q25 + 0.5).abs() < 0.04);
    assert!((s.q75 - 0.5).abs() < 0.04);
}

#[test]
fn distance_filters_and_missing_coordinates() {
    let s: Vec<Option<f64>> = wave(12).into_iter().map(Some).collect();
    // Lisbon and Warsaw are about 2760 km apart; Berlin and Warsaw about 520 km
    let p = panel_from(&[
        ("LIS", meta("PT", Some((38.72, -9.14)), &[]), s.clone()),
        ("WAW", meta("PL", Some((52.23, 21.01)), &[]), s.clone()),
        ("BER", meta("DE", Some((52.52, 13.40)), &[]), s.clone()),
        ("XXX", meta("DE", None, &[]), s.clone()),
    ]);
    let below = spatial_pair_correlations(&p, &RegionPairFilter::DistanceBelow { km: 1000.0 }, 10);
    let keys: Vec<(String, String)> = below.pairs.iter().map(|q| (q.a.clone(), q.b.clone())).collect();
    assert_eq!(keys, vec![("BER".to_string(), "WAW".to_string())]);
    assert_eq!(below.skipped.no_coordinates, 3);

    // a failing non-distance test takes priority over missing coordinates
    let f = RegionPairFilter::and(vec![RegionPairFilter::DistanceBelow { km: 1000.0 }, RegionPairFilter::DifferentCountry]);
    let out = spatial_pair_correlations(&p, &f, 10);
    assert_eq!(out.skipped.no_coordinates, 2);
}

#[test]
fn conjunction_matches_brute_force() {
    let mut rng = crate::rng::rng(3);
    let mut rows = Vec::new();
    let names: Vec<String> = (0..30).map(|i| format!("R{i:02}")).collect();
    for (i, name) in names.iter().enumerate() {
        let coords = if i % 7 == 3 {
            None
        } else {
            Some((rng.random_range(35.0..60.0), rng.random_range(-10.0..30.0)))
        };
        let tags: &[&str] = if i % 3 == 0 { &["EU"] } else { &[] };
        let series: Vec<Option<f64>> = (0..12).map(|_| Some(rng.sample(StandardNormal))).collect();
        rows.push((name.as_str(), meta(&format!("C{}", i % 4), coords, tags), series));
    }
    let p = panel_from(&rows);
    let f = RegionPairFilter::and(vec![
        RegionPairFilter::DifferentCountry,
        RegionPairFilter::DistanceBelow { km: 1000.0 },
    ]);
    let out = spatial_pair_correlations(&p, &f, 10);
    let mut expected = Vec::new();
    let mut no_coords = 0;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let (a, b) = (&rows[i].1, &rows[j].1);
            if a.country == b.country {
                continue;
            }
            match (a.centroid, b.centroid) {
                (Some(x), Some(y)) => {
                    if haversine_km(x, y).unwrap() < 1000.0 {
                        expected.push((rows[i].0.to_string(), rows[j].0.to_string()));
                    }
                }
                _ => no_coords += 1,
            }
        }
    }
    let got: Vec<(String, String)> = out.pairs.iter().map(|q| (q.a.clone(), q.b.clone())).collect();
    assert_eq!(got, expected);
    assert_eq!(out.skipped.no_coordinates, no_coords);
}

#[test]
fn planted_factor_mean_correlation() {
    // r = w f_t + sqrt(1 - w^2) e_rt gives pairwise correlation w^2
    for w in [0.5f64, 0.8] {
        let mut rng = crate::rng::rng(11);
        let f: Vec<f64> = (0..30).map(|_| rng.sample(StandardNormal)).collect();
        let rows: Vec<(String, Vec<Option<f64>>)> = (0..5)
            .map(|r| {
                let s = f
                    .iter()
                    .map(|ft| Some(w * ft + (1.0 - w * w).sqrt() * rng.sample::<f64, _>(StandardNormal)))
                    .collect();
                (format!("R{r}"), s)
            })
            .collect();
        let rows: Vec<_> = rows.iter().map(|(r, s)| (r.as_str(), meta("c", None, &[]), s.clone())).collect();
        let out = spatial_pair_correlations(&panel_from(&rows), &RegionPairFilter::All, 10);
        let m = crate::stats::mean(&out.rhos());
        assert!((m - w * w).abs() < 0.1, "w={w} mean={m}");
    }
}

#[test]
fn null_temporal_mean_near_zero() {
    let mut rng = crate::rng::rng(5);
    let rows: Vec<(String, Vec<Option<f64>>)> = (0..200)
        .map(|r| (format!("R{r:03}"), (0..20).map(|_| Some(rng.sample(StandardNormal))).collect()))
        .collect();
    let rows: Vec<_> = rows.iter().map(|(r, s)| (r.as_str(), meta("c", None, &[]), s.clone())).collect();
    let p = panel_from(&rows);
    let out = temporal_pair_correlations(&p, YearPairFilter::All, 10);
    assert!(crate::stats::mean(&out.rhos()).abs() < 0.02);
}

#[test]
fn table_rows_and_csv() {
    let s: Vec<Option<f64>> = wave(12).into_iter().map(Some).collect();
    let p = panel_from(&[
        ("A", meta("X", None, &[]), s.clone()),
        ("B", meta("X", None, &[]), s.iter().map(|v| v.map(|x| x * 2.0 + 1.0)).collect()),
    ]);
    let rows = correlation_table(&p, &default_groups(&["EU"], &["X"]), 10).unwrap();
    let diff = rows.iter().find(|r| r.group_label == "different country").unwrap();
    assert!(diff.summary.is_none());
    assert_eq!(diff.to_string().trim_end(), format!("{:<9} {:<24} no pairs", "spatial", "different country"));
    let same = rows.iter().find(|r| r.group_label == "same country").unwrap();
    assert_eq!(same.summary.as_ref().unwrap().mean, 1.0);
    let near = rows.iter().find(|r| r.group_label == "<1000km same country").unwrap();
    assert_eq!(near.skipped.no_coordinates, 1);

    let mut buf = Vec::new();
    write_table_csv(&mut buf, &rows).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("kind,group,mean,q25,q75,pair_count,skipped_count\n"));
    assert!(text.contains("spatial,different country,NA,NA,NA,0,0\n"));
    assert!(text.contains("spatial,<1000km same country,NA,NA,NA,0,1\n"));
}

#[test]
fn groups_deserialize_from_toml() {
    #[derive(serde::Deserialize)]
    struct W {
        groups: Vec<CorrelationGroup>,
    }
    let w: W = toml::from_str(
        r#"
        [[groups]]
        label = "near foreign"
        kind = "spatial"
        filter = { type = "and", filters = [{ type = "different_country" }, { type = "distance_below", km = 500.0 }] }

        [[groups]]
        label = "consecutive"
        kind = "temporal"
        years = "consecutive"
        "#,
    )
    .unwrap();
    assert_eq!(w.groups[1], CorrelationGroup::temporal("consecutive", YearPairFilter::Consecutive));
    assert_eq!(
        w.groups[0].selector,
        GroupSelector::Spatial {
            filter: RegionPairFilter::and(vec![
                RegionPairFilter::DifferentCountry,
                RegionPairFilter::DistanceBelow { km: 500.0 }
            ])
        }
    );
}
