use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::hooks::{EnterEvent, ExecutionHooks, ThreadId};

/// Dynamic data gathered for one (method, test) pair while the test runs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairData {
    pub min_stack_distance: u32,
    pub invocation_count: u64,
    pub covered_lines: BTreeSet<u32>,
    pub covered_branch_dirs: BTreeSet<(u32, bool)>,
}

#[derive(Debug, Clone, Copy, Default)]
struct ThreadStack {
    /// Distance of the frame that spawned this thread (0 for the test thread).
    base: u32,
    height: u32,
}

/// Thread-aware stack recorder.
///
/// Keeps one stack height per logical thread. On entry, the distance of a
/// frame is the height of its own thread's stack plus the distance of the
/// frame that started the thread; only the minimum per pair is retained.
#[derive(Debug, Default)]
pub struct StackRecorder {
    current_test: Option<usize>,
    stacks: HashMap<ThreadId, ThreadStack>,
    per_test: BTreeMap<usize, BTreeMap<usize, PairData>>,
    enters: u64,
    exits: u64,
}

impl StackRecorder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Recorded pairs as `test -> method -> data`.
    pub fn into_pairs(self) -> BTreeMap<usize, BTreeMap<usize, PairData>> {
        self.per_test
    }

    /// Number of enter and exit events observed so far.
    pub fn event_counts(&self) -> (u64, u64) {
        (self.enters, self.exits)
    }

    fn pair(&mut self, method: usize) -> &mut PairData {
        let test = self.current_test.expect("events outside a test");
        self.per_test.entry(test).or_default().entry(method).or_insert_with(|| PairData {
            min_stack_distance: u32::MAX,
            ..PairData::default()
        })
    }
}

impl ExecutionHooks for StackRecorder {
    fn test_start(&mut self, test: usize) {
        self.current_test = Some(test);
        self.stacks.clear();
        self.stacks.insert(ThreadId::MAIN, ThreadStack::default());
        self.per_test.entry(test).or_default();
    }

    fn test_end(&mut self, _test: usize) {
        self.current_test = None;
    }

    fn thread_start(&mut self, thread: ThreadId, parent: ThreadId) {
        let p = self.stacks.get(&parent).copied().unwrap_or_default();
        self.stacks.insert(thread, ThreadStack { base: p.base + p.height, height: 0 });
    }

    fn thread_end(&mut self, thread: ThreadId) {
        self.stacks.remove(&thread);
    }

    fn enter(&mut self, event: EnterEvent) {
        self.enters += 1;
        let stack = self.stacks.entry(event.thread).or_default();
        stack.height += 1;
        let distance = stack.base + stack.height;
        let pair = self.pair(event.method);
        pair.min_stack_distance = pair.min_stack_distance.min(distance);
        pair.invocation_count += 1;
    }

    fn exit(&mut self, _method: usize, thread: ThreadId) {
        self.exits += 1;
        if let Some(stack) = self.stacks.get_mut(&thread) {
            stack.height = stack.height.saturating_sub(1);
        }
    }

    fn statement(&mut self, method: usize, index: u32) {
        self.pair(method).covered_lines.insert(index);
    }

    fn branch(&mut self, method: usize, branch: u32, taken: bool) {
        self.pair(method).covered_branch_dirs.insert((branch, taken));
    }
}
