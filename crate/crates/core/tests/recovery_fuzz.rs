//! Arbitrary binary trees, including ones no decoder would produce, must
//! convert back to a word tree whose words tile the sentence.

use charparse::eval::constituents;
use charparse::{from_char_tree, CharTree};
use proptest::prelude::*;

const LABELS: [&str; 8] = ["@1", "@2", "∅", "NP", "VP+@1", "NN+@1", "IP+NP", "TOP"];

fn build(labels: &mut impl Iterator<Item = usize>, splits: &mut impl Iterator<Item = usize>, i: usize, j: usize, chars: &[char]) -> CharTree {
    let label = LABELS[labels.next().unwrap_or(0) % LABELS.len()];
    if j == i + 1 {
        return CharTree::leaf(label, i, chars[i]);
    }
    let k = i + 1 + splits.next().unwrap_or(0) % (j - i - 1);
    let left = build(labels, splits, i, k, chars);
    let right = build(labels, splits, k, j, chars);
    CharTree::binary(label, left, right)
}

fn arb_char_tree() -> impl Strategy<Value = CharTree> {
    (1usize..24, prop::collection::vec(any::<usize>(), 48), prop::collection::vec(any::<usize>(), 24)).prop_map(
        |(n, labels, splits)| {
            let chars: Vec<char> = (0..n).map(|k| char::from_u32(0x4E00 + k as u32).unwrap()).collect();
            build(&mut labels.into_iter(), &mut splits.into_iter(), 0, n, &chars)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn recovery_is_total(tree in arb_char_tree()) {
        let (word_tree, seg) = from_char_tree(&tree);
        word_tree.validate().unwrap();
        let chars: String = tree.chars().into_iter().collect();
        prop_assert_eq!(word_tree.chars(), tree.chars());
        prop_assert_eq!(seg.words.concat(), chars.clone());
        prop_assert_eq!(seg.char_len(), chars.chars().count());
        let mut at = 0;
        for &(s, e) in &seg.spans {
            prop_assert_eq!(s, at);
            prop_assert!(e > s);
            at = e;
        }
        prop_assert_eq!(at, tree.len());
        prop_assert_eq!(word_tree.fringe(), seg.words.clone());
        for (label, s, e) in constituents(&word_tree).keys() {
            prop_assert!(!label.is_empty() && s < e && *e <= tree.len());
        }
    }
}
