use std::time::Instant;

use nilcollect::{GroupContext, Word};

fn main() {
    let class: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(13);
    let t = Instant::now();
    let g: GroupContext<i128> = GroupContext::free(&["a", "b"], class).unwrap();
    println!("basis {} in {:?}", g.basis().len(), t.elapsed());
    let ab = g.normal_form(&Word::new(vec![(1, 1), (2, 1)])).unwrap();
    let mut acc = g.identity();
    for n in 1..=class {
        let t = Instant::now();
        acc = g.multiply(&acc, &ab).unwrap();
        println!("n={n} terms={} {:?} tables={:?}", acc.terms().len(), t.elapsed(), g.table_sizes());
    }
}
