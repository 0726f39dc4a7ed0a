//! Instrumentation callbacks fired by the interpreter.

/// Logical thread of execution. The test body runs on thread 0; every
/// `spawn` creates a new one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ThreadId(pub u32);

impl ThreadId {
    pub const MAIN: ThreadId = ThreadId(0);
}

/// Who performed a call: the test body itself or an application function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Caller {
    Test,
    Method(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnterEvent {
    pub method: usize,
    pub caller: Caller,
    pub thread: ThreadId,
    /// True for the root frame of a spawned thread.
    pub spawned: bool,
}

/// Observer of one test-suite execution. Every method has a default no-op body.
///
/// `exit` fires for every `enter`, including frames left by error propagation.
pub trait ExecutionHooks {
    fn test_start(&mut self, _test: usize) {}
    fn test_end(&mut self, _test: usize) {}
    fn enter(&mut self, _event: EnterEvent) {}
    fn exit(&mut self, _method: usize, _thread: ThreadId) {}
    /// Fires before the spawned root frame is entered.
    fn thread_start(&mut self, _thread: ThreadId, _parent: ThreadId) {}
    fn thread_end(&mut self, _thread: ThreadId) {}
    fn statement(&mut self, _method: usize, _index: u32) {}
    fn branch(&mut self, _method: usize, _branch: u32, _taken: bool) {}
}

/// Uninstrumented execution.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoHooks;

impl ExecutionHooks for NoHooks {}

impl<H: ExecutionHooks + ?Sized> ExecutionHooks for &mut H {
    fn test_start(&mut self, test: usize) {
        (**self).test_start(test)
    }
    fn test_end(&mut self, test: usize) {
        (**self).test_end(test)
    }
    fn enter(&mut self, event: EnterEvent) {
        (**self).enter(event)
    }
    fn exit(&mut self, method: usize, thread: ThreadId) {
        (**self).exit(method, thread)
    }
    fn thread_start(&mut self, thread: ThreadId, parent: ThreadId) {
        (**self).thread_start(thread, parent)
    }
    fn thread_end(&mut self, thread: ThreadId) {
        (**self).thread_end(thread)
    }
    fn statement(&mut self, method: usize, index: u32) {
        (**self).statement(method, index)
    }
    fn branch(&mut self, method: usize, branch: u32, taken: bool) {
        (**self).branch(method, branch, taken)
    }
}
