#ifndef SGW_CYCLE_CLOCK_HPP
#define SGW_CYCLE_CLOCK_HPP

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>

#if defined(__x86_64__) || defined(_M_X64)
#include <x86intrin.h>
#define SGW_HAVE_TSC 1
#endif

namespace sgw {

// Cycle counter used for all stage instrumentation. Prefers the hardware
// timestamp counter; falls back to monotonic nanoseconds scaled by an
// operator-supplied nominal frequency (no autodetection).
class CycleClock {
 public:
    enum class Source : uint8_t { kTsc, kMonotonic };

    static CycleClock tsc() {
#ifdef SGW_HAVE_TSC
        return CycleClock(Source::kTsc, 0);
#else
        throw std::runtime_error("hardware timestamp counter not available on this platform");
#endif
    }

    static CycleClock monotonic(double nominal_hz) {
        if (nominal_hz <= 0)
            throw std::invalid_argument("monotonic cycle clock requires nominal_hz > 0");
        return CycleClock(Source::kMonotonic, nominal_hz);
    }

    // TSC when the platform has one, otherwise monotonic. nominal_hz may
    // be 0 only when the TSC path is taken.
    static CycleClock best(double nominal_hz) {
#ifdef SGW_HAVE_TSC
        (void)nominal_hz;
        return tsc();
#else
        return monotonic(nominal_hz);
#endif
    }

    uint64_t now() const {
#ifdef SGW_HAVE_TSC
        if (source_ == Source::kTsc) return __rdtsc();
#endif
        auto ns = std::chrono::steady_clock::now().time_since_epoch();
        double t = static_cast<double>(
            std::chrono::duration_cast<std::chrono::nanoseconds>(ns).count());
        return static_cast<uint64_t>(t * nominal_hz_ / 1e9);
    }

    Source source() const { return source_; }
    std::string source_name() const {
        return source_ == Source::kTsc ? "tsc" : "monotonic";
    }
    double nominal_hz() const { return nominal_hz_; }

    // Counter frequency estimated against the wall clock; used to convert
    // cycle readings to rates in reports.
    double estimate_hz(std::chrono::milliseconds window = std::chrono::milliseconds(100)) const {
        auto w0 = std::chrono::steady_clock::now();
        uint64_t c0 = now();
        auto deadline = w0 + window;
        while (std::chrono::steady_clock::now() < deadline) {
        }
        uint64_t c1 = now();
        auto w1 = std::chrono::steady_clock::now();
        double secs = std::chrono::duration<double>(w1 - w0).count();
        return static_cast<double>(c1 - c0) / secs;
    }

 private:
    CycleClock(Source s, double hz) : source_(s), nominal_hz_(hz) {}

    Source source_;
    double nominal_hz_;
};

// Instrumented pipeline stages. The names are the CSV vocabulary of the
// bench reports.
enum class Stage : uint8_t {
    kIoRx,
    kIoTx,
    kHash,
    kTableLookup,
    kTableInsert,
    kStateAlloc,
    kCryptoSeal,
    kCryptoOpen,
    kHandshake,
};
constexpr size_t kStageCount = 9;

std::string stage_name(Stage s);
Stage parse_stage(const std::string& name);

}  // namespace sgw

#endif  // SGW_CYCLE_CLOCK_HPP
