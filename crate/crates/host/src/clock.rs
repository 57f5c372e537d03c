use std::time::{Duration, Instant};

use rtdevs_core::rt::WallClock;

/// Spin instead of sleeping when this close to a deadline.
const SPIN_WINDOW_US: u64 = 2_000;

/// Monotonic host clock. `now()` counts microseconds since construction.
///
/// `wait_until` sleeps to within 2 ms of the deadline and spins the rest,
/// trading CPU for wake-up precision.
#[derive(Clone, Copy, Debug)]
pub struct HostClock {
    origin: Instant,
}

impl HostClock {
    pub fn new() -> Self {
        HostClock { origin: Instant::now() }
    }
}

impl Default for HostClock {
    fn default() -> Self {
        Self::new()
    }
}

impl WallClock for HostClock {
    fn now(&self) -> u64 {
        self.origin.elapsed().as_micros() as u64
    }

    fn wait_until(&mut self, deadline: u64) {
        loop {
            let now = self.now();
            if now >= deadline {
                return;
            }
            let remaining = deadline - now;
            if remaining > SPIN_WINDOW_US {
                std::thread::sleep(Duration::from_micros(remaining - SPIN_WINDOW_US));
            } else {
                std::hint::spin_loop();
            }
        }
    }
}
