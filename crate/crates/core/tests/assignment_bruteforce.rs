use formation_core::assignment::{assignment_cost, hungarian};
use formation_core::optimizer::restart_rng;
use nalgebra::DMatrix;
use rand::Rng;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                prefix.push(j);
                go(prefix, used, out);
                prefix.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn brute_force(c: &DMatrix<f64>, perms: &[Vec<usize>]) -> f64 {
    perms.iter().map(|p| assignment_cost(c, p)).fold(f64::INFINITY, f64::min)
}

#[test]
fn hungarian_equals_brute_force_on_integer_costs() {
    // Integer entries keep every sum exact, so ties compare with `==`.
    let mut rng = restart_rng(11, 0);
    let perms: Vec<Vec<Vec<usize>>> = (0..=7).map(permutations).collect();
    for _ in 0..200 {
        let n = rng.random_range(1..=7);
        let c = DMatrix::from_fn(n, n, |_, _| rng.random_range(0..25) as f64);
        let assign = hungarian(&c).unwrap();
        let mut seen = assign.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..n).collect::<Vec<_>>());
        assert_eq!(assignment_cost(&c, &assign), brute_force(&c, &perms[n]));
    }
}

#[test]
fn hungarian_equals_brute_force_on_real_costs() {
    let mut rng = restart_rng(12, 0);
    for _ in 0..100 {
        let n = rng.random_range(2..=6);
        let perms = permutations(n);
        let c = DMatrix::from_fn(n, n, |_, _| rng.random_range(0.0..10.0));
        let got = assignment_cost(&c, &hungarian(&c).unwrap());
        assert!((got - brute_force(&c, &perms)).abs() < 1e-12);
    }
}
