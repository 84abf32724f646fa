//! Per-thread counter of calls that leave the process (LLM requests and the
//! like). The recall path reads it around the traversal segment to show that
//! no external call happened there.

use std::cell::Cell;

thread_local! {
    static EXTERNAL_CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Every network or model invocation must call this once per request.
pub fn record_external_call() {
    EXTERNAL_CALLS.with(|c| c.set(c.get() + 1));
}

/// Number of external calls made so far on the current thread.
pub fn external_calls() -> u64 {
    EXTERNAL_CALLS.with(Cell::get)
}
