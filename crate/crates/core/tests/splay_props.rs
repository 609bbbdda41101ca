use incbidi::om::{om_create, OmElem, OmOrder};
use incbidi::splay::{SplayForest, NIL};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Nested intervals of a random tree with `n` nodes.
fn laminar(rng: &mut ChaCha8Rng, n: usize) -> (OmOrder, Vec<(OmElem, OmElem)>) {
    let (mut om, mut last) = om_create();
    let mut parent = vec![usize::MAX; n];
    for (i, p) in parent.iter_mut().enumerate().skip(1) {
        *p = rng.gen_range(0..i);
    }
    // Children of a node are later nodes; emit an Euler tour.
    let mut kids = vec![Vec::new(); n];
    for i in 1..n {
        kids[parent[i]].push(i);
    }
    let mut iv = vec![(last, last); n];
    let mut stack = vec![(0usize, false)];
    while let Some((v, done)) = stack.pop() {
        last = om.insert_after(last).unwrap();
        if done {
            iv[v].1 = last;
        } else {
            iv[v].0 = last;
            stack.push((v, true));
            for &k in kids[v].iter().rev() {
                stack.push((k, false));
            }
        }
    }
    (om, iv)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn lowest_containing_matches_brute_force(seed in any::<u64>(), n in 1usize..120) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (om, iv) = laminar(&mut rng, n);
        let mut f = SplayForest::new();
        let mut root = NIL;
        let mut members = vec![None; n];
        for _ in 0..4 * n {
            let i = rng.gen_range(0..n);
            match members[i] {
                None if rng.gen_bool(0.6) => {
                    let e = f.alloc(iv[i].0, iv[i].1, i as u64);
                    root = f.insert(root, e, &om);
                    members[i] = Some(e);
                }
                Some(e) if rng.gen_bool(0.3) => {
                    root = f.remove(e, &om);
                    f.release(e);
                    members[i] = None;
                }
                _ => {
                    let (r, hit) = f.lowest_containing(root, iv[i].0, iv[i].1, &om);
                    root = r;
                    let want = (0..n)
                        .filter(|&j| members[j].is_some())
                        .filter(|&j| om.lt(iv[j].0, iv[i].0) && om.lt(iv[i].1, iv[j].1))
                        .max_by(|&a, &b| om.cmp(iv[a].0, iv[b].0));
                    prop_assert_eq!(hit.map(|e| f.item(e) as usize), want);
                }
            }
            f.check(root, &om).map_err(TestCaseError::fail)?;
        }
        let mut inorder: Vec<usize> = f.entries_of(root).iter().map(|&e| f.item(e) as usize).collect();
        let mut expect: Vec<usize> = (0..n).filter(|&j| members[j].is_some()).collect();
        expect.sort_by(|&a, &b| om.cmp(iv[a].0, iv[b].0));
        prop_assert_eq!(&inorder, &expect);
        // Splitting at any interval start partitions by pre-order.
        if !expect.is_empty() {
            let k = rng.gen_range(0..n);
            let (l, r) = f.split(root, iv[k].0, &om);
            f.check(l, &om).map_err(TestCaseError::fail)?;
            f.check(r, &om).map_err(TestCaseError::fail)?;
            inorder = f.entries_of(l).iter().map(|&e| f.item(e) as usize).collect();
            let before = |j: usize| om.lt(iv[j].0, iv[k].0);
            prop_assert!(inorder.iter().all(|&j| before(j)));
            prop_assert_eq!(inorder.len(), expect.iter().filter(|&&j| before(j)).count());
            root = f.join(l, r, &om);
            f.check(root, &om).map_err(TestCaseError::fail)?;
        }
    }
}
