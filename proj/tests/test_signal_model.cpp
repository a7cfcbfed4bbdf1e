#include "doctest.h"

#include "helpers.hpp"
#include "ovt/errors.hpp"
#include "ovt/signal_model.hpp"

#include <functional>
#include <string>

using namespace ovt;

namespace {

bool throws_with(Errc code, const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code() == code;
    }
    return false;
}

const ManifestEntry kEntry{"a.csv", "t1", ClassLabel::overtake};

std::string rows(const std::string& body) {
    return "t,s1,s2,s3,s4,s5,s6,s7,s8,s9,s10\n" + body;
}

} // namespace

TEST_CASE("label names round trip and reject unknowns") {
    CHECK(parse_label("overtake") == ClassLabel::overtake);
    CHECK(parse_label("no_overtake") == ClassLabel::no_overtake);
    CHECK(label_name(ClassLabel::overtake) == "overtake");
    CHECK(label_name(ClassLabel::no_overtake) == "no_overtake");
    CHECK(throws_with(Errc::unknown_label, [] { parse_label("yes"); }));
    CHECK(throws_with(Errc::unknown_label, [] { parse_label(""); }));
}

TEST_CASE("signal index covers all ten signals") {
    SignalFrame f;
    f.accel_pedal_pos = 0.25;
    f.right_indicator = 1;
    CHECK(f.signal(0) == 0.25);
    CHECK(f.signal(9) == 1.0);
    CHECK(throws_with(Errc::invalid_argument, [&] { (void)f.signal(10); }));
    CHECK(throws_with(Errc::invalid_argument, [&] { (void)f.signal(-1); }));
}

TEST_CASE("recordings round trip exactly through csv") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        Recording rec = helpers::random_recording(rng, 1 + rng.uniform_index(0, 40));
        rec.file_id = kEntry.file;
        rec.truck_id = kEntry.truck_id;
        rec.label = kEntry.label;
        const Recording back = parse_recording(serialize_recording(rec), kEntry);
        REQUIRE(back.frames.size() == rec.frames.size());
        CHECK(back.frames == rec.frames);
        CHECK(back.label == rec.label);
        CHECK(!back.trigger_index.has_value());
    }
}

TEST_CASE("csv header is fixed") {
    const std::string good = rows("0.000000,0.5,10,20,1,60,0,0,1,0,0\n");
    CHECK(parse_recording(good, kEntry).frames.size() == 1);
    CHECK(throws_with(Errc::bad_format, [] {
        parse_recording("time,s1,s2,s3,s4,s5,s6,s7,s8,s9,s10\n0,0,0,0,0,0,0,0,0,0,0\n", kEntry);
    }));
    CHECK(throws_with(Errc::bad_format, [] { parse_recording("", kEntry); }));
}

TEST_CASE("rows must have 11 parseable columns") {
    CHECK(throws_with(Errc::malformed_row,
                      [] { parse_recording(rows("0.0,0.5,10,20,1,60,0,0,1,0\n"), kEntry); }));
    CHECK(throws_with(Errc::malformed_row, [] {
        parse_recording(rows("0.0,0.5,10,20,1,60,0,0,1,0,0,7\n"), kEntry);
    }));
    CHECK(throws_with(Errc::malformed_row,
                      [] { parse_recording(rows("0.0,abc,10,20,1,60,0,0,1,0,0\n"), kEntry); }));
    CHECK(throws_with(Errc::malformed_row,
                      [] { parse_recording(rows("0.0,nan,10,20,1,60,0,0,1,0,0\n"), kEntry); }));
    CHECK(throws_with(Errc::malformed_row,
                      [] { parse_recording(rows("0.0,inf,10,20,1,60,0,0,1,0,0\n"), kEntry); }));
}

TEST_CASE("flags must be exactly 0 or 1") {
    CHECK(throws_with(Errc::malformed_row,
                      [] { parse_recording(rows("0.0,0.5,10,20,1,60,0,0,2,0,0\n"), kEntry); }));
    CHECK(throws_with(Errc::malformed_row, [] {
        parse_recording(rows("0.0,0.5,10,20,1,60,0,0,0.5,0,0\n"), kEntry);
    }));
    const Recording rec = parse_recording(rows("0.0,0.5,10,20,1,60,0,0,1.0,0,0\n"), kEntry);
    CHECK(rec.frames[0].lane_change_status == 1);
}

TEST_CASE("out of range physical values are rejected") {
    CHECK(throws_with(Errc::malformed_row,
                      [] { parse_recording(rows("0.0,1.5,10,20,1,60,0,0,0,0,0\n"), kEntry); }));
    CHECK(throws_with(Errc::malformed_row,
                      [] { parse_recording(rows("0.0,0.5,-1,20,1,60,0,0,0,0,0\n"), kEntry); }));
    CHECK(throws_with(Errc::malformed_row,
                      [] { parse_recording(rows("0.0,0.5,10,-2,1,60,0,0,0,0,0\n"), kEntry); }));
    CHECK(throws_with(Errc::malformed_row,
                      [] { parse_recording(rows("0.0,0.5,10,20,1,-60,0,0,0,0,0\n"), kEntry); }));
    // relative speed and accelerations may be negative
    const Recording rec =
        parse_recording(rows("0.0,0.5,10,20,-3,60,-1,-1,0,0,0\n"), kEntry);
    CHECK(rec.frames[0].rel_speed_left_wheel == -3.0);
}

TEST_CASE("frame spacing must be 0.1 s") {
    CHECK(throws_with(Errc::non_uniform_rate, [] {
        parse_recording(
            rows("0.0,0.5,10,20,1,60,0,0,0,0,0\n0.3,0.5,10,20,1,60,0,0,0,0,0\n"), kEntry);
    }));
    CHECK(throws_with(Errc::non_uniform_rate, [] {
        parse_recording(
            rows("0.0,0.5,10,20,1,60,0,0,0,0,0\n0.0,0.5,10,20,1,60,0,0,0,0,0\n"), kEntry);
    }));
    // half a microsecond of jitter is within tolerance
    const Recording rec = parse_recording(
        rows("0.000000,0.5,10,20,1,60,0,0,0,0,0\n0.1000005,0.5,10,20,1,60,0,0,0,0,0\n"),
        kEntry);
    CHECK(rec.frames.size() == 2);
}

TEST_CASE("manifest entry json variant carries metadata") {
    const Recording rec =
        parse_recording(rows("0.0,0.5,10,20,1,60,0,0,1,0,0\n"),
                        std::string_view(R"({"file":"x.csv","truck_id":"t9","label":"no_overtake"})"));
    CHECK(rec.file_id == "x.csv");
    CHECK(rec.truck_id == "t9");
    CHECK(rec.label == ClassLabel::no_overtake);
    CHECK(throws_with(Errc::bad_format, [] {
        parse_recording(rows("0.0,0.5,10,20,1,60,0,0,1,0,0\n"), std::string_view("{"));
    }));
    CHECK(throws_with(Errc::bad_format, [] {
        parse_recording(rows("0.0,0.5,10,20,1,60,0,0,1,0,0\n"),
                        std::string_view(R"({"file":"x.csv"})"));
    }));
}

TEST_CASE("manifests round trip") {
    const std::vector<ManifestEntry> entries = {
        {"a.csv", "t1", ClassLabel::overtake},
        {"b.csv", "t2", ClassLabel::no_overtake},
    };
    const std::vector<ManifestEntry> back = parse_manifest(serialize_manifest(entries));
    CHECK(back == entries);
    CHECK(throws_with(Errc::bad_format, [] { parse_manifest("{}"); }));
    CHECK(throws_with(Errc::bad_format, [] { parse_manifest("not json"); }));
    CHECK(parse_manifest("[]").empty());
}

TEST_CASE("crop takes 100 frames before the trigger and 10 from it on") {
    Rng rng(7);
    Recording rec = helpers::random_recording(rng, 200);
    rec.trigger_index = 120;
    const CroppedRecording crop = crop_around_trigger(rec);
    REQUIRE(crop.frames.size() == kCropFrames);
    CHECK(crop.frames.front() == rec.frames[20]);
    CHECK(crop.frames[kCropPreFrames] == rec.frames[120]);
    CHECK(crop.frames.back() == rec.frames[129]);
    CHECK(crop.label == rec.label);
    CHECK(crop.source_file_id == rec.file_id);
}

TEST_CASE("crop boundary conditions") {
    Rng rng(8);
    Recording rec = helpers::random_recording(rng, 110);

    rec.trigger_index = 100; // exactly enough on both sides
    CHECK(crop_around_trigger(rec).frames.size() == kCropFrames);

    rec.trigger_index = 99;
    CHECK(throws_with(Errc::insufficient_context, [&] { crop_around_trigger(rec); }));

    rec.trigger_index = 101; // only 9 frames from the trigger on
    CHECK(throws_with(Errc::insufficient_context, [&] { crop_around_trigger(rec); }));

    rec.trigger_index.reset();
    CHECK(throws_with(Errc::missing_trigger, [&] { crop_around_trigger(rec); }));

    rec.trigger_index = 100;
    rec.label.reset();
    CHECK(throws_with(Errc::unknown_label, [&] { crop_around_trigger(rec); }));
}
