//! Corpus BLEU-4 by exhaustive n-gram counting, no hashing.

fn grams(toks: &[&str], n: usize) -> Vec<String> {
    if toks.len() < n {
        return Vec::new();
    }
    (0..=toks.len() - n).map(|i| toks[i..i + n].join("\u{1}")).collect()
}

/// Clipped matches: each hypothesis n-gram consumes one unused reference copy.
fn clipped(hyp: &[String], reference: &[String]) -> usize {
    let mut used = vec![false; reference.len()];
    let mut hits = 0;
    for g in hyp {
        if let Some(j) = (0..reference.len()).find(|&j| !used[j] && reference[j] == *g) {
            used[j] = true;
            hits += 1;
        }
    }
    hits
}

pub fn corpus_bleu4(hyps: &[&str], refs: &[&str]) -> f64 {
    let mut matched = [0usize; 4];
    let mut total = [0usize; 4];
    let (mut hyp_len, mut ref_len) = (0, 0);
    for (h, r) in hyps.iter().zip(refs) {
        let h: Vec<&str> = h.split_whitespace().collect();
        let r: Vec<&str> = r.split_whitespace().collect();
        hyp_len += h.len();
        ref_len += r.len();
        for n in 1..=4 {
            let hg = grams(&h, n);
            matched[n - 1] += clipped(&hg, &grams(&r, n));
            total[n - 1] += hg.len();
        }
    }
    if matched.contains(&0) {
        return 0.0;
    }
    let mut product = 1.0;
    for n in 0..4 {
        product *= matched[n] as f64 / total[n] as f64;
    }
    let bp = if hyp_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    bp * product.powf(0.25)
}
