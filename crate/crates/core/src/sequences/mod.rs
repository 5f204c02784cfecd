mod builders;
mod euler;
mod native;
mod schedule;

pub use builders::{
    build_cpmg, build_ldd, build_sequence, build_ur6, build_ur6_repeated, build_xy4, phased_x, DDKind, DDSequenceSpec,
    LayoutItem, SequenceLayout, DEFAULT_LDD_GATES,
};
pub use euler::{compose_single_qubit, euler_to_native, EulerAngles};
pub use native::{GateDurations, NativeGate, DEFAULT_DT_NS};
pub use schedule::{
    alap_schedule, insert_dd, Circuit, CircuitInstruction, CircuitOp, DdInsertion, IdleWindow, Instruction,
    ScheduledOp, Slot, SlotKind, TimedSchedule,
};
