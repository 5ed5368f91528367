//! Best parameter control method per (strategy, repair, dimension).

use std::collections::{BTreeMap, BTreeSet};

use crate::bench::ecdf::EcdfCurve;
use crate::mutation::StrategyKind;
use crate::pcm::PcmKind;
use crate::variation::RepairPolicy;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CurveKey {
    pub strategy: StrategyKind,
    pub pcm: PcmKind,
    pub repair: RepairPolicy,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub strategy: StrategyKind,
    pub repair: RepairPolicy,
    pub n: usize,
    pub best: PcmKind,
    pub proportion: f64,
    /// Methods compared elsewhere in the table but absent from this group.
    pub missing: Vec<PcmKind>,
}

fn tail(curve: &EcdfCurve, back: usize) -> f64 {
    curve.proportion.len().checked_sub(back + 1).map_or(0.0, |k| curve.proportion[k])
}

type GroupKey = (StrategyKind, RepairPolicy, usize);

/// Pick the method with the highest final ECDF proportion in each group.
///
/// Ties go to the higher proportion at the second-to-last grid point, then
/// to the lexicographically smaller method id.
pub fn best_config_table(curves: &BTreeMap<CurveKey, EcdfCurve>) -> Vec<TableRow> {
    let compared: BTreeSet<PcmKind> = curves.keys().map(|k| k.pcm).collect();
    let mut groups: BTreeMap<GroupKey, Vec<(PcmKind, &EcdfCurve)>> = BTreeMap::new();
    for (key, curve) in curves {
        groups.entry((key.strategy, key.repair, key.n)).or_default().push((key.pcm, curve));
    }
    groups
        .into_iter()
        .map(|((strategy, repair, n), members)| {
            let (best, curve) = members
                .iter()
                .copied()
                .max_by(|(pa, ca), (pb, cb)| {
                    tail(ca, 0)
                        .total_cmp(&tail(cb, 0))
                        .then(tail(ca, 1).total_cmp(&tail(cb, 1)))
                        .then(pb.id().cmp(pa.id()))
                })
                .expect("groups are non-empty");
            let present: BTreeSet<PcmKind> = members.iter().map(|(p, _)| *p).collect();
            TableRow {
                strategy,
                repair,
                n,
                best,
                proportion: tail(curve, 0),
                missing: compared.difference(&present).copied().collect(),
            }
        })
        .collect()
}

pub fn format_table(rows: &[TableRow]) -> String {
    let mut out = String::from("strategy,repair,n,best_pcm,proportion,missing\n");
    for r in rows {
        let missing: Vec<&str> = r.missing.iter().map(|p| p.id()).collect();
        out.push_str(&format!(
            "{},{},{},{},{:?},{}\n",
            r.strategy,
            r.repair,
            r.n,
            r.best,
            r.proportion,
            missing.join(";")
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(points: &[f64]) -> EcdfCurve {
        EcdfCurve { grid: (1..=points.len()).map(|k| k as f64).collect(), proportion: points.to_vec(), denominator: 51 }
    }

    fn key(pcm: PcmKind) -> CurveKey {
        CurveKey { strategy: StrategyKind::Rand1, pcm, repair: RepairPolicy::Baldwinian, n: 5 }
    }

    #[test]
    fn strict_argmax() {
        let curves = BTreeMap::from([
            (key(PcmKind::PCo), curve(&[0.1, 0.40])),
            (key(PcmKind::PSha), curve(&[0.3, 0.35])),
            (key(PcmKind::PJa), curve(&[0.2, 0.30])),
        ]);
        let rows = best_config_table(&curves);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].best, PcmKind::PCo);
        assert_eq!(rows[0].proportion, 0.40);
    }

    #[test]
    fn tie_goes_to_earlier_leader() {
        let curves = BTreeMap::from([
            (key(PcmKind::PCo), curve(&[0.1, 0.2, 0.5])),
            (key(PcmKind::PSha), curve(&[0.1, 0.3, 0.5])),
        ]);
        assert_eq!(best_config_table(&curves)[0].best, PcmKind::PSha);
    }

    #[test]
    fn full_tie_is_lexicographic() {
        let curves =
            BTreeMap::from([(key(PcmKind::PSha), curve(&[0.2, 0.5])), (key(PcmKind::PJa), curve(&[0.2, 0.5]))]);
        assert_eq!(best_config_table(&curves)[0].best, PcmKind::PJa);
    }

    #[test]
    fn missing_cells_are_reported() {
        let mut other = key(PcmKind::PJ);
        other.n = 10;
        let curves = BTreeMap::from([
            (key(PcmKind::PCo), curve(&[0.5])),
            (key(PcmKind::PJ), curve(&[0.4])),
            (other, curve(&[0.1])),
        ]);
        let rows = best_config_table(&curves);
        assert_eq!(rows[0].missing, vec![]);
        assert_eq!(rows[1].missing, vec![PcmKind::PCo]);
        assert!(format_table(&rows).contains("rand1,baldwin,10,p-j,0.1,p-co"));
    }
}
