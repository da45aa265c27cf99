mod support;

use canon_cddl::{inline, parse_cddl};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::gen;

#[test]
fn printed_types_reparse_to_the_same_tree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3000 {
        let t = gen::type_expr(&mut rng, 4);
        let text = format!("root = {t}");
        let schema = parse_cddl(&text).unwrap_or_else(|e| panic!("{text}: {e}"));
        assert_eq!(inline(&schema), t, "{text}");
    }
}
