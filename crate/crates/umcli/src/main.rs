fn main() {
    std::process::exit(umcli::run(std::env::args_os()));
}
