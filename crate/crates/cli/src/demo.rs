//! Synthetic quote streams whose one-tick mid-price durations are known.

use flexdur::data_io::LobEvent;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Bid/ask on an integer tick grid with a spread of one or two ticks, so
/// every single-side move shifts the mid by half a tick.
struct Book {
    bid: i64,
    ask: i64,
    tick: f64,
}

impl Book {
    /// Moves the mid half a tick up (`dir > 0`) or down.
    fn half_step(&mut self, dir: i64) {
        let wide = self.ask - self.bid == 2;
        match (dir > 0, wide) {
            (true, false) => self.ask += 1,
            (true, true) => self.bid += 1,
            (false, false) => self.bid -= 1,
            (false, true) => self.ask -= 1,
        }
    }

    fn quote(&self, timestamp: f64) -> LobEvent {
        LobEvent {
            timestamp,
            best_bid: self.bid as f64 * self.tick,
            best_ask: self.ask as f64 * self.tick,
        }
    }
}

/// Quote updates that realize `durations` as one-tick mid-price moves.
///
/// The first quote at time 0 anchors the series. Inside each duration the
/// mid makes up to two half-tick excursions that return to the reference,
/// then a half-tick toward the next event and the completing half-tick at
/// the event time.
pub fn quotes_from_durations(durations: &[f64], tick: f64, start_price: f64, seed: u64) -> Vec<LobEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bid = (start_price / tick).round() as i64;
    let mut book = Book { bid, ask: bid + 1, tick };
    let mut out = Vec::with_capacity(durations.len() * 4 + 1);
    out.push(book.quote(0.0));
    let mut t = 0.0;
    for &tau in durations {
        let wiggles = rng.random_range(0..=2usize);
        let mut marks: Vec<f64> = (0..2 * wiggles + 1).map(|_| rng.random::<f64>() * tau).collect();
        marks.sort_by(f64::total_cmp);
        let mut marks = marks.into_iter();
        for _ in 0..wiggles {
            let dir = if rng.random::<bool>() { 1 } else { -1 };
            book.half_step(dir);
            out.push(book.quote(t + marks.next().unwrap()));
            book.half_step(-dir);
            out.push(book.quote(t + marks.next().unwrap()));
        }
        // keep prices away from zero over long runs
        let dir = if book.bid < 20 || rng.random::<bool>() { 1 } else { -1 };
        book.half_step(dir);
        out.push(book.quote(t + marks.next().unwrap()));
        t += tau;
        book.half_step(dir);
        out.push(book.quote(t));
    }
    out
}
