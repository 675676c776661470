#include <catch2/catch_amalgamated.hpp>

#include <cstdio>

// Prints one line per acceptance criterion as test cases finish.
namespace {

class AcceptanceListener : public Catch::EventListenerBase {
public:
    using Catch::EventListenerBase::EventListenerBase;

    void testCaseEnded(const Catch::TestCaseStats& stats) override {
        const bool ok = stats.totals.assertions.failed == 0 && !stats.aborting;
        std::printf("%s %s\n", ok ? "[PASS]" : "[FAIL]", stats.testInfo->name.c_str());
        std::fflush(stdout);
    }
};

}  // namespace

CATCH_REGISTER_LISTENER(AcceptanceListener)
