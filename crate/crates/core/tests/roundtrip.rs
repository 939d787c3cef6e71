use charparse::synthetic::{generate, SynthConfig};
use charparse::{from_char_tree, gold_span_labels, segmentation_of, to_char_tree};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn word_trees_survive_the_round_trip(seed in any::<u64>()) {
        for tree in generate(4, &SynthConfig::small(seed)) {
            let ct = to_char_tree(&tree).unwrap();
            ct.validate_spans().unwrap();
            prop_assert_eq!(ct.node_count(), 2 * ct.len() - 1);
            prop_assert_eq!(gold_span_labels(&ct).unwrap().entries.len(), 2 * ct.len() - 1);
            let (back, seg) = from_char_tree(&ct);
            prop_assert_eq!(&back, &tree);
            prop_assert_eq!(seg, segmentation_of(&tree));
        }
    }
}
