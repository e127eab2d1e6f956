from dotenv import load_dotenv
import os

load_dotenv()
local_dev = os.getenv("LOCAL_DEV") == "true"

# processes used for per-basis residue work; 1 evaluates everything in-process
workers = int(os.getenv("BERNOULLI_WORKERS", "1"))

# step polynomials with more terms than this are only written with --outfile
step_poly_term_cap = int(os.getenv("STEP_POLY_TERM_CAP", "400"))

# halving steps allowed while making the default limit direction generic
limit_perturb_attempts = int(os.getenv("LIMIT_PERTURB_ATTEMPTS", "64"))

# defaults for the brute-force oracle
oracle_radius = int(os.getenv("ORACLE_RADIUS", "200"))
oracle_precision = int(os.getenv("ORACLE_PRECISION", "128"))
oracle_chunk_rows = int(os.getenv("ORACLE_CHUNK_ROWS", "64"))
oracle_pair_symmetrize = os.getenv("ORACLE_PAIR_SYMMETRIZE", "true") == "true"
