#include "polaron_app/commands.hpp"

int main(int argc, char** argv) { return polaron::app::run_cli(argc, argv); }
