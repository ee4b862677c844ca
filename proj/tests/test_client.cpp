#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "roomrec/audio/wav.hpp"
#include "roomrec/client/client.hpp"
#include "support/harness.hpp"

using namespace roomrec;
using testsupport::Harness;
using testsupport::TempDir;

namespace {

int run_cli(const std::string &args, std::string *out = nullptr) {
    const std::string cmd = std::string(ROOMREC_CLI) + " " + args + " 2>/dev/null";
    FILE *p = ::popen(cmd.c_str(), "r");
    if (!p) return -1;
    std::string text;
    char buf[512];
    while (std::fgets(buf, sizeof buf, p)) text += buf;
    const int st = ::pclose(p);
    if (out) *out = text;
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

// a port nothing listens on: bind, read the number, release
int dead_port() {
    TempDir d;
    auto cfg = testsupport::quick_config(d.path);
    Harness h(cfg);
    return h.port;
}

}  // namespace

TEST(CaptureSource, ParsesSchemes) {
    EXPECT_EQ(client::CaptureSource::parse("device").kind, client::CaptureSource::Kind::device);
    const auto f = client::CaptureSource::parse("file:/tmp/a.wav");
    EXPECT_EQ(f.kind, client::CaptureSource::Kind::file);
    EXPECT_EQ(f.locator, "/tmp/a.wav");
    const auto s = client::CaptureSource::parse("sim:default/3");
    EXPECT_EQ(s.kind, client::CaptureSource::Kind::simulator);
    EXPECT_EQ(s.locator, "default/3");
    EXPECT_THROW(client::CaptureSource::parse("sim:"), ArgumentError);
    EXPECT_THROW(client::CaptureSource::parse("http://x"), ArgumentError);
    EXPECT_THROW(client::mode_from_string("train"), ArgumentError);
}

TEST(EmitRecord, RecordCountsFollowTheMode) {
    const auto src = client::CaptureSource::parse("sim:default/1");
    EXPECT_EQ(client::emit_record(client::Mode::recognition, src, 4).size(), 1u);
    const auto batch = client::emit_record(client::Mode::training, src, 4);
    ASSERT_EQ(batch.size(), 500u);
    for (const auto &r : batch) EXPECT_EQ(r.size(), 4410u);
    const auto again = client::emit_record(client::Mode::training, src, 4);
    EXPECT_EQ(batch[17], again[17]);
    const auto other = client::emit_record(client::Mode::training, src, 5);
    EXPECT_FALSE(batch[17] == other[17]);
}

TEST(EmitRecord, FileSourceReplaysAndDeviceIsUnavailable) {
    TempDir d;
    const auto path = d.path / "r.wav";
    const auto recs = testsupport::room_records(2, 3, 8);
    audio::wav_write(recs, path);
    const auto back = client::emit_record(client::Mode::recognition, client::CaptureSource::parse("file:" + path.string()));
    ASSERT_EQ(back.size(), 1u);
    ASSERT_EQ(back[0].size(), recs[0].size());
    for (std::size_t i = 0; i < recs[0].size(); ++i)
        ASSERT_NEAR(back[0].samples()[i], recs[0].samples()[i], 1.0 / 32767.0);  // 16-bit PCM
    EXPECT_THROW(client::emit_record(client::Mode::recognition, client::CaptureSource::parse("device")), CaptureError);
    EXPECT_THROW(client::emit_record(client::Mode::recognition, client::CaptureSource::parse("file:/nonexistent.wav")),
                 CaptureError);
    EXPECT_THROW(client::emit_record(client::Mode::recognition, client::CaptureSource::parse("sim:default/99999")),
                 CaptureError);
}

TEST(ServiceClient, TransportAndServerErrorsAreDistinct) {
    const int port = dead_port();
    client::ClientOptions o;
    o.timeout = std::chrono::milliseconds(2000);
    client::ServiceClient dead("http://127.0.0.1:" + std::to_string(port), o);
    EXPECT_THROW(dead.task("task-000001"), TransportError);

    TempDir d;
    Harness h(testsupport::quick_config(d.path));
    client::ServiceClient cli(h.url());
    try {
        cli.recognize(testsupport::room_records(0, 1, 1)[0]);
        FAIL() << "expected a 409";
    } catch (const client::ServerError &e) {
        EXPECT_EQ(e.status(), 409);
    }
    try {
        cli.upload_label("nope", "lab");
        FAIL() << "expected a 404";
    } catch (const client::ServerError &e) {
        EXPECT_EQ(e.status(), 404);
        EXPECT_EQ(e.field(), "session_id");
    }
}

TEST(ServiceClient, UploadLabelWatch) {
    TempDir d;
    Harness h(testsupport::quick_config(d.path));
    client::ServiceClient cli(h.url());
    for (std::size_t room = 0; room < 2; ++room) {
        const auto recs = testsupport::room_records(room, 20, 2);
        const auto s = cli.upload_samples(recs);
        EXPECT_FALSE(s.session_id.empty());
        const auto l = cli.upload_label(s.session_id, "room" + std::to_string(room));
        const auto st = cli.watch(l.task_id, std::chrono::milliseconds(50));
        EXPECT_EQ(st.state, "done");
        if (room == 1) EXPECT_EQ(st.model_version, 1u);
    }
    const auto r = cli.recognize(testsupport::room_records(1, 1, 40)[0]);
    EXPECT_EQ(r.model_version, 1u);
    EXPECT_EQ(r.topk.size(), 2u);
    EXPECT_NEAR(r.topk[0].score + r.topk[1].score, 1.0, 1e-6);
}

TEST(Cli, ExitCodes) {
    TempDir d;
    const auto wav = (d.path / "one.wav").string();
    EXPECT_EQ(run_cli("emit-record --mode recognition --source sim:default/0 --out " + wav), 0);
    EXPECT_EQ(audio::wav_read(wav).size(), 1u);
    EXPECT_EQ(run_cli("emit-record --mode sideways --out " + wav), 2);
    EXPECT_EQ(run_cli("bogus"), 2);
    EXPECT_EQ(run_cli("emit-record --source device --out " + wav), 3);

    const std::string dead = "--server http://127.0.0.1:" + std::to_string(dead_port());
    EXPECT_EQ(run_cli(dead + " upload --in " + wav), 4);

    Harness h(testsupport::quick_config(d.path / "svc"));
    EXPECT_EQ(run_cli("--server " + h.url() + " upload --in " + wav), 5);  // no model yet
    std::string out;
    EXPECT_EQ(run_cli("--server " + h.url() + " --json upload --mode training --source sim:default/0 --seed 3", &out), 0);
    EXPECT_NE(out.find("session_id"), std::string::npos);
    EXPECT_EQ(run_cli("--server " + h.url() + " label --session zzz --label lab"), 5);
}
