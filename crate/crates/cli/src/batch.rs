use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Applies `work` to every input on up to `jobs` threads; results keep input order.
pub fn run<T, F>(inputs: &[PathBuf], jobs: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&PathBuf) -> T + Sync,
{
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<T>>> = inputs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(inputs.len()).max(1) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(input) = inputs.get(i) else { break };
                let out = work(input);
                *slots[i].lock().expect("worker panicked") = Some(out);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| {
            s.into_inner()
                .expect("worker panicked")
                .expect("every input processed")
        })
        .collect()
}
