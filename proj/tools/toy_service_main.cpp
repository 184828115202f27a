#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "toy_service.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Toy HTTP target for end-to-end runs"};
  std::string host = "127.0.0.1";
  int port = 8080;
  app.add_option("--host", host, "Address to bind");
  app.add_option("--port", port, "Port to bind");
  CLI11_PARSE(app, argc, argv);

  toy::ToyService service;
  std::cout << "listening on http://" << host << ":" << port << std::endl;
  if (!service.listen(host, port)) {
    std::cerr << "cannot bind " << host << ":" << port << "\n";
    return EXIT_FAILURE;
  }
  return EXIT_SUCCESS;
}
