// Reference protocol server with echo and toy modes, for conformance runs
// and for exercising `spotlight render --denoiser sidecar` without a model.

#include <csignal>
#include <iostream>
#include <memory>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "spotlight/error.hpp"
#include "spotlight/sidecar.hpp"
#include "spotlight/transport.hpp"

namespace {

std::unique_ptr<spotlight::SidecarHandler> make_handler(const std::string& mode) {
    if (mode == "echo") {
        return std::make_unique<spotlight::EchoHandler>();
    }
    return std::make_unique<spotlight::ToyHandler>();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reference sidecar server (echo | toy)"};
    std::string mode = "toy";
    int port = -1;
    bool stdio = false;
    app.add_option("--mode", mode, "echo | toy")->check(CLI::IsMember({"echo", "toy"}));
    auto* listen = app.add_option("--listen", port, "TCP port on 127.0.0.1 (0 = ephemeral)");
    app.add_flag("--stdio", stdio, "Serve a single connection over stdin/stdout")->excludes(listen);
    CLI11_PARSE(app, argc, argv);

    std::signal(SIGPIPE, SIG_IGN);
    try {
        if (stdio || port < 0) {
            auto handler = make_handler(mode);
            auto transport = spotlight::make_fd_transport(0, 1);
            spotlight::serve_connection(*transport, *handler);
            return 0;
        }
        spotlight::TcpListener listener(static_cast<std::uint16_t>(port));
        std::cout << "listening on 127.0.0.1:" << listener.port() << std::endl;
        for (;;) {
            std::shared_ptr<spotlight::Transport> conn = listener.accept();
            std::thread([conn, mode] {
                auto handler = make_handler(mode);
                try {
                    spotlight::serve_connection(*conn, *handler);
                } catch (const std::exception& e) {
                    std::cerr << "connection closed: " << e.what() << '\n';
                }
            }).detach();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
}
