//! Explicit-state oracle: data-parallel against sequential scheduling.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use reacsynth_core::encode::{bounded_domains, TransitionSystem};
use reacsynth_core::logic::{Formula, Term, Var};
use reacsynth_core::oracle::{oracle_viable, Mode};

fn within(v: &Var, hi: i64) -> Formula {
    Formula::and([Formula::ge(Term::var(v), Term::int(0)), Formula::le(Term::var(v), Term::int(hi))])
}

/// Two coupled counters on an n×n grid pushed around by a three-valued input.
fn grid(n: i64) -> TransitionSystem {
    let (x, y, i) = (Var::int("x"), Var::int("y"), Var::int("i"));
    let (xp, yp) = (x.primed(), y.primed());
    let trans = Formula::and([
        within(&x, n - 1),
        within(&y, n - 1),
        within(&xp, n - 1),
        within(&yp, n - 1),
        Formula::eq(Term::var(&xp), Term::sum([Term::var(&x), Term::var(&i), Term::int(-1)])),
        Formula::le(Term::var(&yp), Term::sum([Term::var(&y), Term::var(&x)])),
    ]);
    let init = Formula::and([within(&x, n - 1), within(&y, n - 1)]);
    TransitionSystem::new("grid", vec![x, y], vec![i.clone()], within(&i, 2), init, trans).expect("well scoped")
}

fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle_viable");
    g.sample_size(10);
    for n in [8, 14] {
        let ts = grid(n);
        let d = bounded_domains(&ts).expect("finite");
        for (label, mode) in [("parallel", Mode::Parallel), ("sequential", Mode::Sequential)] {
            g.bench_with_input(BenchmarkId::new(label, n * n), &n, |b, _| {
                b.iter(|| oracle_viable(&ts, &d, mode).expect("within limits"))
            });
        }
    }
    g.finish();
}

criterion_group!(benches, oracle);
criterion_main!(benches);
