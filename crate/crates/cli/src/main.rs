fn main() {
    // die quietly when a pipe consumer closes early, like standard unix tools
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(kslab_cli::run_cli(std::env::args_os()));
}
