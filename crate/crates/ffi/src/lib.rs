//! C interface to `valley-codes`.
//!
//! Codes are opaque [`VcCode`] handles loaded from JSON files. Bit strings
//! cross the boundary as arrays holding one bit (0 or 1) per byte. Every
//! fallible function returns a [`VcStatus`]; the message for the last
//! failure on the calling thread is available from [`vc_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::Arc;

use valley_codes::bitstream::BitString;
use valley_codes::channel::{transmit, ChannelModel, RngSpec};
use valley_codes::harness;
use valley_codes::inner_code::{monte_carlo_dfp, InnerCodec};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    DecodeFailure = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VcChannelKind {
    Bdc = 0,
    Prc = 1,
}

/// A deletion channel with deletion probability `param`, or a repeat
/// channel with rate `param`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct VcChannel {
    pub kind: VcChannelKind,
    pub param: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct VcDfpEstimate {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub failures: u64,
    pub trials: u64,
}

/// Opaque code handle.
pub struct VcCode {
    codec: Arc<dyn InnerCodec>,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: VcStatus, msg: impl Into<String>) -> VcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
    status
}

fn guard(f: impl FnOnce() -> VcStatus) -> VcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(VcStatus::Panic, msg)
        }
    }
}

impl VcChannel {
    fn model(self) -> Result<ChannelModel, VcStatus> {
        match self.kind {
            VcChannelKind::Bdc => ChannelModel::bdc(self.param),
            VcChannelKind::Prc => ChannelModel::prc(self.param),
        }
        .map_err(|e| fail(VcStatus::InvalidArgument, e.to_string()))
    }
}

/// # Safety
/// `bits` must point to `len` readable bytes, or be null with `len == 0`.
unsafe fn read_bits(bits: *const u8, len: usize) -> Result<BitString, VcStatus> {
    if len == 0 {
        return Ok(BitString::new());
    }
    if bits.is_null() {
        return Err(fail(VcStatus::NullPointer, "bit array is null"));
    }
    let slice = std::slice::from_raw_parts(bits, len);
    if let Some(i) = slice.iter().position(|&b| b > 1) {
        return Err(fail(VcStatus::InvalidArgument, format!("byte {i} is {}, not a bit", slice[i])));
    }
    Ok(BitString::from_bits(slice.iter().copied()))
}

/// Copies `bits` out, or reports the needed capacity through `out_len`.
///
/// # Safety
/// `out` must point to `cap` writable bytes (or be null with `cap == 0`);
/// `out_len` must be writable.
unsafe fn write_bits(bits: &BitString, out: *mut u8, cap: usize, out_len: *mut usize) -> VcStatus {
    if out_len.is_null() {
        return fail(VcStatus::NullPointer, "out_len is null");
    }
    *out_len = bits.len();
    if bits.len() > cap {
        return fail(VcStatus::BufferTooSmall, format!("need {} bytes, have {cap}", bits.len()));
    }
    if bits.is_empty() {
        return VcStatus::Ok;
    }
    if out.is_null() {
        return fail(VcStatus::NullPointer, "output buffer is null");
    }
    ptr::copy_nonoverlapping(bits.bits().as_ptr(), out, bits.len());
    VcStatus::Ok
}

/// Copies the last error message on this thread into `buf` (NUL
/// terminated, truncated to `cap - 1` bytes) and returns its full length.
///
/// # Safety
/// `buf` must point to `cap` writable bytes, or be null with `cap == 0`.
#[no_mangle]
pub unsafe extern "C" fn vc_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Loads a recursive code config or a table code fixture.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vc_code_load(path: *const c_char, out: *mut *mut VcCode) -> VcStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            return fail(VcStatus::NullPointer, "path or out is null");
        }
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            return fail(VcStatus::InvalidArgument, "path is not UTF-8");
        };
        match harness::load_codec(Path::new(path)) {
            Ok(codec) => {
                *out = Box::into_raw(Box::new(VcCode { codec }));
                VcStatus::Ok
            }
            Err(e @ harness::HarnessError::Io { .. }) => fail(VcStatus::Io, e.to_string()),
            Err(e) => fail(VcStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `code` must come from [`vc_code_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vc_code_free(code: *mut VcCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Message length in bits; 0 for a null handle.
///
/// # Safety
/// `code` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vc_code_message_len(code: *const VcCode) -> usize {
    code.as_ref().map_or(0, |c| c.codec.message_len())
}

/// Block length in bits; 0 for a null handle.
///
/// # Safety
/// `code` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vc_code_block_len(code: *const VcCode) -> usize {
    code.as_ref().map_or(0, |c| c.codec.block_len())
}

/// # Safety
/// `code` must be a live handle; buffers as in [`vc_transmit`].
#[no_mangle]
pub unsafe extern "C" fn vc_code_encode(
    code: *const VcCode,
    message: *const u8,
    message_len: usize,
    out: *mut u8,
    out_cap: usize,
    out_len: *mut usize,
) -> VcStatus {
    guard(|| {
        let Some(code) = code.as_ref() else {
            return fail(VcStatus::NullPointer, "code is null");
        };
        let message = match read_bits(message, message_len) {
            Ok(m) => m,
            Err(s) => return s,
        };
        if message.len() != code.codec.message_len() {
            return fail(
                VcStatus::InvalidArgument,
                format!("message has {} bits, the code takes {}", message.len(), code.codec.message_len()),
            );
        }
        write_bits(&code.codec.encode(&message), out, out_cap, out_len)
    })
}

/// Returns [`VcStatus::DecodeFailure`] when no message is found.
///
/// # Safety
/// `code` must be a live handle; buffers as in [`vc_transmit`].
#[no_mangle]
pub unsafe extern "C" fn vc_code_decode(
    code: *const VcCode,
    received: *const u8,
    received_len: usize,
    out: *mut u8,
    out_cap: usize,
    out_len: *mut usize,
) -> VcStatus {
    guard(|| {
        let Some(code) = code.as_ref() else {
            return fail(VcStatus::NullPointer, "code is null");
        };
        let received = match read_bits(received, received_len) {
            Ok(r) => r,
            Err(s) => return s,
        };
        match code.codec.decode(&received) {
            Ok(message) => write_bits(&message, out, out_cap, out_len),
            Err(e) => fail(VcStatus::DecodeFailure, e.to_string()),
        }
    })
}

/// Sends `input` through `channel` using stream `stream` of `seed`.
///
/// When the output does not fit, returns [`VcStatus::BufferTooSmall`] with
/// the needed length in `*out_len`; repeating the call with the same seed
/// and stream gives the same output.
///
/// # Safety
/// `input` must point to `input_len` bytes, `out` to `out_cap` writable
/// bytes, and `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vc_transmit(
    channel: VcChannel,
    seed: u64,
    stream: u64,
    input: *const u8,
    input_len: usize,
    out: *mut u8,
    out_cap: usize,
    out_len: *mut usize,
) -> VcStatus {
    guard(|| {
        let channel = match channel.model() {
            Ok(c) => c,
            Err(s) => return s,
        };
        let x = match read_bits(input, input_len) {
            Ok(x) => x,
            Err(s) => return s,
        };
        write_bits(&transmit(channel, &x, RngSpec::new(seed, stream)), out, out_cap, out_len)
    })
}

/// Monte-Carlo decoding failure probability with a Clopper-Pearson interval.
///
/// # Safety
/// `code` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vc_code_dfp(
    code: *const VcCode,
    channel: VcChannel,
    trials: u64,
    seed: u64,
    out: *mut VcDfpEstimate,
) -> VcStatus {
    guard(|| {
        let (Some(code), false) = (code.as_ref(), out.is_null()) else {
            return fail(VcStatus::NullPointer, "code or out is null");
        };
        let channel = match channel.model() {
            Ok(c) => c,
            Err(s) => return s,
        };
        match monte_carlo_dfp(code.codec.as_ref(), channel, trials, RngSpec::new(seed, 0)) {
            Ok(e) => {
                *out = VcDfpEstimate {
                    estimate: e.estimate,
                    lower: e.lower,
                    upper: e.upper,
                    failures: e.failures,
                    trials: e.trials,
                };
                VcStatus::Ok
            }
            Err(e) => fail(VcStatus::InvalidArgument, e.to_string()),
        }
    })
}
