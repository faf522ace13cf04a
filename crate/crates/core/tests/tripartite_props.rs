mod common;

use std::collections::BTreeSet;

use common::*;
use exposome::ingest::fold_identities;
use exposome::tripartite::project_tripartite;
use proptest::prelude::*;

const PREFIXES: [Option<&str>; 5] = [None, Some("C"), Some("C1"), Some("J10."), Some("Z")];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn support_is_conserved(seed in any::<u64>(), n in 0usize..200) {
        let records = random_records(&mut rng(seed), n, Vocab::default());
        let ledger = fold_identities(&records);
        for prefix in PREFIXES {
            let g = project_tripartite(&ledger, prefix);
            let expected = oracle_tripartite_support(&records, prefix);
            prop_assert_eq!(g.agent_pathology.values().sum::<u64>(), expected);
            prop_assert_eq!(g.agent_occupation.values().sum::<u64>(), expected);
        }
    }

    #[test]
    fn edges_only_touch_agents(seed in any::<u64>(), n in 0usize..200) {
        let records = random_records(&mut rng(seed), n, Vocab::default());
        let g = project_tripartite(&fold_identities(&records), None);
        g.check_invariants().unwrap();
        // the agent side of every edge is an agent; the other side never is
        let agents: BTreeSet<&String> = records.iter().flat_map(|r| r.agents.iter().map(|a| &a.code)).collect();
        prop_assert_eq!(g.agents.iter().collect::<BTreeSet<_>>(), agents);
        for (a, o) in g.agent_occupation.keys() {
            prop_assert!(g.agents.contains(a) && g.occupations.contains(o));
        }
        for (a, p) in g.agent_pathology.keys() {
            prop_assert!(g.agents.contains(a) && g.pathologies.contains(p));
        }
    }

    #[test]
    fn longer_prefix_gives_subgraph(seed in any::<u64>(), n in 0usize..200) {
        let records = random_records(&mut rng(seed), n, Vocab::default());
        let ledger = fold_identities(&records);
        let chain = [None, Some("C"), Some("C1"), Some("C11"), Some("C11.")];
        for pair in chain.windows(2) {
            let (wide, narrow) = (project_tripartite(&ledger, pair[0]), project_tripartite(&ledger, pair[1]));
            prop_assert!(narrow.pathologies.is_subset(&wide.pathologies));
            prop_assert!(narrow.agents.is_subset(&wide.agents));
            prop_assert!(narrow.occupations.is_subset(&wide.occupations));
            for (edge, s) in &narrow.agent_pathology {
                prop_assert!(wide.agent_pathology.get(edge).is_some_and(|w| w >= s));
            }
            for (edge, s) in &narrow.agent_occupation {
                prop_assert!(wide.agent_occupation.get(edge).is_some_and(|w| w >= s));
            }
        }
    }
}
