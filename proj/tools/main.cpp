#include "qtasep/cli.hpp"

int main(int argc, char** argv) { return qtasep::run_cli(argc, argv); }
