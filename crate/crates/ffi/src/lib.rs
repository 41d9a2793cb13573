//! C ABI for the distance-cost transport toolkit.
//!
//! Every object crosses the boundary as an opaque handle created by a
//! `*_from_json` constructor and destroyed by the matching `*_free`.
//! Functions return a [`MongeStatus`]; on any failure the thread-local
//! message from [`monge_last_error`] describes what went wrong. JSON in
//! and out uses the same schemas as the `monge` CLI, so handles and
//! files are interchangeable.
//!
//! The generated header lives at `include/monge.h` (written by the build
//! script via cbindgen).

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use monge_core::geometry::{distance, MetricSpec, Point};
use monge_core::measures::DiscreteMeasure;
use monge_core::selection::solve_two_stage;
use monge_core::transport::{build_cost, solve_kantorovich, TransportPlan};
use monge_core::verification::splitting_index;
use monge_core::MongeError;

/// Result of every fallible call in this API.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MongeStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The input was rejected (malformed JSON, dimension mismatch,
    /// invalid measure or parameter).
    InvalidInput = 3,
    /// The solver failed on a well-formed input.
    SolverFailure = 4,
    /// The provided buffer is too small; the required size was written
    /// to the `written` out-parameter.
    BufferTooSmall = 5,
    /// The queried quantity does not exist on this handle (for example
    /// the secondary cost of a plain transport plan).
    Missing = 6,
    /// A panic was caught at the boundary; state is unchanged.
    InternalPanic = 7,
}

/// Opaque metric handle (Euclidean, p-norm, polyhedral, or Hilbert).
pub struct MongeMetric {
    inner: MetricSpec,
}

/// Opaque discrete measure handle (canonicalized and normalized).
pub struct MongeMeasure {
    inner: DiscreteMeasure,
}

/// Opaque transport plan handle, optionally carrying the two-stage
/// selection costs.
pub struct MongePlan {
    plan: TransportPlan,
    primary_cost: f64,
    secondary_cost: Option<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized: String = message.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: MongeStatus, message: &str) -> MongeStatus {
    set_last_error(message);
    status
}

fn fail_with(err: &MongeError) -> MongeStatus {
    let status = if err.is_input_error() {
        MongeStatus::InvalidInput
    } else {
        MongeStatus::SolverFailure
    };
    fail(status, &err.to_string())
}

/// Run a body with panics converted to `InternalPanic`.
fn guarded(body: impl FnOnce() -> MongeStatus) -> MongeStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(MongeStatus::InternalPanic, "internal panic at the C boundary"),
    }
}

/// # Safety
/// `ptr` must be null or a valid nul-terminated C string.
unsafe fn utf8_arg<'a>(ptr: *const c_char) -> Result<&'a str, MongeStatus> {
    if ptr.is_null() {
        return Err(fail(MongeStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(MongeStatus::InvalidUtf8, "string argument is not valid UTF-8"))
}

fn out_arg<'a, T>(ptr: *mut T) -> Result<&'a mut T, MongeStatus> {
    if ptr.is_null() {
        return Err(fail(MongeStatus::NullPointer, "out-parameter is null"));
    }
    Ok(unsafe { &mut *ptr })
}

fn handle_arg<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, MongeStatus> {
    if ptr.is_null() {
        return Err(fail(MongeStatus::NullPointer, &format!("{what} handle is null")));
    }
    Ok(unsafe { &*ptr })
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn monge_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread. Never null;
/// empty before the first failure.
#[no_mangle]
pub extern "C" fn monge_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Build a metric from JSON, e.g. `{"kind":"euclidean"}`,
/// `{"kind":"pnorm","p":1.5}`, `{"kind":"polyhedral","unit_ball":[[1,1],...]}`,
/// or `{"kind":"hilbert","body":{"kind":"ball","center":[0,0],"radius":1}}`.
///
/// # Safety
/// `json` must be a valid nul-terminated C string; `out` must point to
/// writable storage for one pointer. On success `*out` owns the handle
/// and must be released with [`monge_metric_free`].
#[no_mangle]
pub unsafe extern "C" fn monge_metric_from_json(
    json: *const c_char,
    out: *mut *mut MongeMetric,
) -> MongeStatus {
    guarded(|| {
        let out = match out_arg(out) {
            Ok(v) => v,
            Err(s) => return s,
        };
        let text = match utf8_arg(json) {
            Ok(v) => v,
            Err(s) => return s,
        };
        match serde_json::from_str::<MetricSpec>(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(MongeMetric { inner }));
                MongeStatus::Ok
            }
            Err(e) => fail(MongeStatus::InvalidInput, &format!("metric JSON: {e}")),
        }
    })
}

/// Release a metric handle. Null is ignored.
///
/// # Safety
/// `metric` must be null or a pointer returned by
/// [`monge_metric_from_json`] that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn monge_metric_free(metric: *mut MongeMetric) {
    if !metric.is_null() {
        drop(Box::from_raw(metric));
    }
}

/// Build a measure from JSON:
/// `{"dim":2,"points":[[0,0],[1,0]],"weights":[1,1]}`. Points are
/// deduplicated, sorted, and weights normalized to total mass one.
///
/// # Safety
/// `json` must be a valid nul-terminated C string; `out` must point to
/// writable storage for one pointer. On success `*out` owns the handle
/// and must be released with [`monge_measure_free`].
#[no_mangle]
pub unsafe extern "C" fn monge_measure_from_json(
    json: *const c_char,
    out: *mut *mut MongeMeasure,
) -> MongeStatus {
    guarded(|| {
        let out = match out_arg(out) {
            Ok(v) => v,
            Err(s) => return s,
        };
        let text = match utf8_arg(json) {
            Ok(v) => v,
            Err(s) => return s,
        };
        match serde_json::from_str::<DiscreteMeasure>(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(MongeMeasure { inner }));
                MongeStatus::Ok
            }
            Err(e) => fail(MongeStatus::InvalidInput, &format!("measure JSON: {e}")),
        }
    })
}

/// Number of support atoms.
///
/// # Safety
/// `measure` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn monge_measure_len(
    measure: *const MongeMeasure,
    out: *mut usize,
) -> MongeStatus {
    guarded(|| {
        let out = match out_arg(out) {
            Ok(v) => v,
            Err(s) => return s,
        };
        match handle_arg(measure, "measure") {
            Ok(m) => {
                *out = m.inner.len();
                MongeStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Ambient dimension of the support points.
///
/// # Safety
/// `measure` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn monge_measure_dim(
    measure: *const MongeMeasure,
    out: *mut usize,
) -> MongeStatus {
    guarded(|| {
        let out = match out_arg(out) {
            Ok(v) => v,
            Err(s) => return s,
        };
        match handle_arg(measure, "measure") {
            Ok(m) => {
                *out = m.inner.points().first().map_or(0, |p| p.coords().len());
                MongeStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Release a measure handle. Null is ignored.
///
/// # Safety
/// `measure` must be null or a pointer returned by
/// [`monge_measure_from_json`] that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn monge_measure_free(measure: *mut MongeMeasure) {
    if !measure.is_null() {
        drop(Box::from_raw(measure));
    }
}

/// Distance between two points of dimension `dim` under `metric`.
///
/// # Safety
/// `metric` must be a live handle; `x` and `y` must point to `dim`
/// readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn monge_distance(
    metric: *const MongeMetric,
    x: *const f64,
    y: *const f64,
    dim: usize,
    out: *mut f64,
) -> MongeStatus {
    guarded(|| {
        let out = match out_arg(out) {
            Ok(v) => v,
            Err(s) => return s,
        };
        let metric = match handle_arg(metric, "metric") {
            Ok(m) => m,
            Err(s) => return s,
        };
        if x.is_null() || y.is_null() {
            return fail(MongeStatus::NullPointer, "coordinate array is null");
        }
        if dim == 0 {
            return fail(MongeStatus::InvalidInput, "dimension must be at least 1");
        }
        let xs = std::slice::from_raw_parts(x, dim);
        let ys = std::slice::from_raw_parts(y, dim);
        let (px, py) = match (Point::new(xs.to_vec()), Point::new(ys.to_vec())) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return fail_with(&e),
        };
        match distance(&metric.inner, &px, &py) {
            Ok(d) => {
                *out = d;
                MongeStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

fn solve_plain(
    metric: &MetricSpec,
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
) -> Result<MongePlan, MongeError> {
    let cost = build_cost(mu1, mu2, metric, 1.0)?;
    let solution = solve_kantorovich(mu1, mu2, &cost)?;
    Ok(MongePlan {
        primary_cost: solution.value,
        secondary_cost: None,
        plan: solution.plan,
    })
}

/// Optimal distance-cost transport value between two measures.
///
/// # Safety
/// `metric`, `mu1`, `mu2` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn monge_wasserstein(
    metric: *const MongeMetric,
    mu1: *const MongeMeasure,
    mu2: *const MongeMeasure,
    out: *mut f64,
) -> MongeStatus {
    guarded(|| {
        let out = match out_arg(out) {
            Ok(v) => v,
            Err(s) => return s,
        };
        let (metric, a, b) = match (
            handle_arg(metric, "metric"),
            handle_arg(mu1, "measure"),
            handle_arg(mu2, "measure"),
        ) {
            (Ok(m), Ok(a), Ok(b)) => (m, a, b),
            (Err(s), _, _) | (_, Err(s), _) | (_, _, Err(s)) => return s,
        };
        match solve_plain(&metric.inner, &a.inner, &b.inner) {
            Ok(result) => {
                *out = result.primary_cost;
                MongeStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Solve the distance-cost problem and return the optimal plan.
///
/// # Safety
/// `metric`, `mu1`, `mu2` must be live handles; `out` must point to
/// writable storage for one pointer. On success `*out` owns the handle
/// and must be released with [`monge_plan_free`].
#[no_mangle]
pub unsafe extern "C" fn monge_solve(
    metric: *const MongeMetric,
    mu1: *const MongeMeasure,
    mu2: *const MongeMeasure,
    out: *mut *mut MongePlan,
) -> MongeStatus {
    guarded(|| {
        let out = match out_arg(out) {
            Ok(v) => v,
            Err(s) => return s,
        };
        let (metric, a, b) = match (
            handle_arg(metric, "metric"),
            handle_arg(mu1, "measure"),
            handle_arg(mu2, "measure"),
        ) {
            (Ok(m), Ok(a), Ok(b)) => (m, a, b),
            (Err(s), _, _) | (_, Err(s), _) | (_, _, Err(s)) => return s,
        };
        match solve_plain(&metric.inner, &a.inner, &b.inner) {
            Ok(result) => {
                *out = Box::into_raw(Box::new(result));
                MongeStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Solve the two-stage problem: distance-cost optimal value, then the
/// squared-Euclidean secondary selection on the optimal face. Pass a
/// non-positive `eta` to use the default tight-set tolerance.
///
/// # Safety
/// `metric`, `mu1`, `mu2` must be live handles; `out` must point to
/// writable storage for one pointer. On success `*out` owns the handle
/// and must be released with [`monge_plan_free`].
#[no_mangle]
pub unsafe extern "C" fn monge_solve_secondary(
    metric: *const MongeMetric,
    mu1: *const MongeMeasure,
    mu2: *const MongeMeasure,
    eta: f64,
    out: *mut *mut MongePlan,
) -> MongeStatus {
    guarded(|| {
        let out = match out_arg(out) {
            Ok(v) => v,
            Err(s) => return s,
        };
        let (metric, a, b) = match (
            handle_arg(metric, "metric"),
            handle_arg(mu1, "measure"),
            handle_arg(mu2, "measure"),
        ) {
            (Ok(m), Ok(a), Ok(b)) => (m, a, b),
            (Err(s), _, _) | (_, Err(s), _) | (_, _, Err(s)) => return s,
        };
        let eta = if eta > 0.0 { Some(eta) } else { None };
        match solve_two_stage(&a.inner, &b.inner, &metric.inner, eta) {
            Ok(solution) => {
                *out = Box::into_raw(Box::new(MongePlan {
                    primary_cost: solution.selection.primary_cost,
                    secondary_cost: Some(solution.selection.secondary_cost),
                    plan: solution.selection.plan,
                }));
                MongeStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Total distance cost of the plan.
///
/// # Safety
/// `plan` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn monge_plan_primary_cost(
    plan: *const MongePlan,
    out: *mut f64,
) -> MongeStatus {
    guarded(|| {
        let out = match out_arg(out) {
            Ok(v) => v,
            Err(s) => return s,
        };
        match handle_arg(plan, "plan") {
            Ok(p) => {
                *out = p.primary_cost;
                MongeStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Squared-Euclidean secondary cost; `Missing` for plans that did not
/// come from [`monge_solve_secondary`].
///
/// # Safety
/// `plan` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn monge_plan_secondary_cost(
    plan: *const MongePlan,
    out: *mut f64,
) -> MongeStatus {
    guarded(|| {
        let out = match out_arg(out) {
            Ok(v) => v,
            Err(s) => return s,
        };
        match handle_arg(plan, "plan") {
            Ok(p) => match p.secondary_cost {
                Some(v) => {
                    *out = v;
                    MongeStatus::Ok
                }
                None => fail(
                    MongeStatus::Missing,
                    "plan carries no secondary cost; use monge_solve_secondary",
                ),
            },
            Err(s) => s,
        }
    })
}

/// Number of support entries in the plan.
///
/// # Safety
/// `plan` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn monge_plan_len(plan: *const MongePlan, out: *mut usize) -> MongeStatus {
    guarded(|| {
        let out = match out_arg(out) {
            Ok(v) => v,
            Err(s) => return s,
        };
        match handle_arg(plan, "plan") {
            Ok(p) => {
                *out = p.plan.entries().len();
                MongeStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Read entry `index` of the plan as `(source, target, mass)`.
///
/// # Safety
/// `plan` must be a live handle; `source`, `target`, `mass` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn monge_plan_entry(
    plan: *const MongePlan,
    index: usize,
    source: *mut usize,
    target: *mut usize,
    mass: *mut f64,
) -> MongeStatus {
    guarded(|| {
        let (source, target, mass) = match (out_arg(source), out_arg(target), out_arg(mass)) {
            (Ok(a), Ok(b), Ok(c)) => (a, b, c),
            (Err(s), _, _) | (_, Err(s), _) | (_, _, Err(s)) => return s,
        };
        let p = match handle_arg(plan, "plan") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match p.plan.entries().get(index) {
            Some(entry) => {
                *source = entry.i;
                *target = entry.j;
                *mass = entry.mass;
                MongeStatus::Ok
            }
            None => fail(
                MongeStatus::InvalidInput,
                &format!(
                    "entry index {index} out of range for a plan with {} entries",
                    p.plan.entries().len()
                ),
            ),
        }
    })
}

/// Splitting index of the plan: zero exactly when it is induced by a map.
///
/// # Safety
/// `plan` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn monge_plan_splitting_index(
    plan: *const MongePlan,
    out: *mut f64,
) -> MongeStatus {
    guarded(|| {
        let out = match out_arg(out) {
            Ok(v) => v,
            Err(s) => return s,
        };
        match handle_arg(plan, "plan") {
            Ok(p) => {
                *out = splitting_index(&p.plan).index;
                MongeStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Serialize the plan to JSON (same schema as the CLI's `plan.json`).
/// Writes at most `capacity` bytes including the trailing nul and stores
/// the required size (including the nul) in `written`. When the buffer
/// is too small, returns `BufferTooSmall` and leaves `written` set so
/// the caller can retry; `buffer` may be null only with zero capacity.
///
/// # Safety
/// `plan` must be a live handle; `buffer` must point to `capacity`
/// writable bytes (or be null with `capacity == 0`); `written` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn monge_plan_to_json(
    plan: *const MongePlan,
    buffer: *mut c_char,
    capacity: usize,
    written: *mut usize,
) -> MongeStatus {
    guarded(|| {
        let written = match out_arg(written) {
            Ok(v) => v,
            Err(s) => return s,
        };
        let p = match handle_arg(plan, "plan") {
            Ok(p) => p,
            Err(s) => return s,
        };
        if buffer.is_null() && capacity != 0 {
            return fail(MongeStatus::NullPointer, "buffer is null with nonzero capacity");
        }
        let json = match monge_core::io::to_json_string(&p.plan) {
            Ok(j) => j,
            Err(e) => return fail_with(&e),
        };
        let needed = json.len() + 1;
        *written = needed;
        if capacity < needed {
            return fail(
                MongeStatus::BufferTooSmall,
                &format!("plan JSON needs {needed} bytes, buffer holds {capacity}"),
            );
        }
        let dst = std::slice::from_raw_parts_mut(buffer as *mut u8, needed);
        dst[..json.len()].copy_from_slice(json.as_bytes());
        dst[json.len()] = 0;
        MongeStatus::Ok
    })
}

/// Release a plan handle. Null is ignored.
///
/// # Safety
/// `plan` must be null or a pointer returned by [`monge_solve`] or
/// [`monge_solve_secondary`] that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn monge_plan_free(plan: *mut MongePlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}
