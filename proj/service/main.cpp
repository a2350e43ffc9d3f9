#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "facesketch/service.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;

}  // namespace

int main(int argc, char** argv)
{
    fsk::ServiceOptions options;
    CLI::App app{"Modeling service: REST and websocket front end over facesketch sessions"};
    app.add_option("--address", options.address, "Listen address")->envname("FACESKETCH_ADDRESS");
    app.add_option("--port", options.port, "Listen port (0 picks a free one)")->envname("FACESKETCH_PORT");
    app.add_option("--corpus", options.corpus_path, "Suggestion corpus JSON")->envname("FACESKETCH_CORPUS");
    app.add_option("--debug-dir", options.debug_dir, "Dump refine intermediates here")->envname("FACESKETCH_DEBUG_DIR");
    app.add_option("--workers", options.worker_threads, "Request handler threads")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    try {
        fsk::Server server(options);
        const unsigned short port = server.start();
        std::cout << "listening on " << options.address << ":" << port << std::endl;
        std::signal(SIGINT, [](int) { g_stop = 1; });
        std::signal(SIGTERM, [](int) { g_stop = 1; });
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        server.stop();
    } catch (const std::exception& e) {
        std::cerr << "facesketch-server: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
