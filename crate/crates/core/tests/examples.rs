//! Every example under `examples/` runs to completion.

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }

        #[test]
        fn $name() {
            $name::run_example().expect(concat!(stringify!($name), " failed"));
        }
    };
}

example!(corpus_basics);
example!(hash_embeddings);
example!(threshold_strategies);
example!(ir_baselines);
example!(evaluation_metrics);
example!(prompt_templates);
example!(leave_one_out);
example!(cli_manifest_replay);
