macro_rules! example {
    ($module:ident, $file:literal, $test:ident) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }

        #[test]
        fn $test() {
            $module::run_example().expect(concat!($file, " should run"));
        }
    };
}

example!(perfect_transfer, "perfect_transfer.rs", perfect_transfer_runs);
example!(feed_forward_channels, "feed_forward_channels.rs", feed_forward_channels_runs);
example!(optimal_angles, "optimal_angles.rs", optimal_angles_runs);
example!(simplified_protocol, "simplified_protocol.rs", simplified_protocol_runs);
example!(ppbs_oracle, "ppbs_oracle.rs", ppbs_oracle_runs);
example!(imperfect_ppbs, "imperfect_ppbs.rs", imperfect_ppbs_runs);
example!(process_tomography, "process_tomography.rs", process_tomography_runs);
