from absl import flags

from dmkde.dataset import SplitSpec, mixture_from_lists
from dmkde.errors import ParameterError
from dmkde.pipeline import (
    BACKENDS, STATE_CHOICES, DensityExperimentConfig, ExperimentConfig, SweepGrid)

FLAGS = flags.FLAGS
flags.DEFINE_string('name', 'dmkde', help='session name, outputs go to <logdir>/<name>')
flags.DEFINE_string('logdir', 'logs', help='root of all session directories')
flags.DEFINE_bool('progress', True, help='show tqdm progress bars')
# dataset
flags.DEFINE_string('data_path', None, help='CSV file with a header row')
flags.DEFINE_string('label_column', None, help='name of the label column')
flags.DEFINE_string('outlier_label', '1', help='label value marking outliers')
flags.DEFINE_string('normal_label', None,
                    help='label value marking normal samples, others are rejected')
flags.DEFINE_bool('standardize', True, help='z-score features with train statistics')
flags.DEFINE_float('split_train', 0.6, help='train fraction')
flags.DEFINE_float('split_val', 0.2, help='validation fraction')
flags.DEFINE_float('split_test', 0.2, help='test fraction')
flags.DEFINE_bool('split_stratified', True, help='keep class fractions in every partition')
flags.DEFINE_integer('split_seed', 0, help='seed of the train/val/test split')
# embedding
flags.DEFINE_enum('embedding', 'aff', ['rff', 'aff', 'file'],
                  help='random, adaptive or pre-trained (params_path) Fourier features')
flags.DEFINE_string('params_path', None, help='FourierParams JSON for embedding=file')
flags.DEFINE_integer('dim_features', 4, help='number of Fourier features d')
flags.DEFINE_float('gamma', 2 ** -7, help='Gaussian kernel parameter of the feature map')
flags.DEFINE_float('gamma_s', 2 ** -6, help='Gaussian kernel parameter of the AFF targets')
flags.DEFINE_integer('aff_epochs', 50, help='AFF training epochs')
flags.DEFINE_float('aff_lr', 1e-3, help='AFF Adam learning rate')
flags.DEFINE_float('aff_beta1', 0.9, help='AFF Adam beta1')
flags.DEFINE_float('aff_beta2', 0.999, help='AFF Adam beta2')
flags.DEFINE_integer('aff_batch_size', 64, help='AFF mini-batch size')
# density model and estimation
flags.DEFINE_enum('state', 'mixed', list(STATE_CHOICES),
                  help='training state, both evaluates pure and mixed on shared features')
flags.DEFINE_enum('solver', 'jacobi', ['jacobi', 'lapack'], help='eigensolver of rho')
flags.DEFINE_enum('backend', 'simulator-exact', list(BACKENDS), help='density estimator')
flags.DEFINE_integer('shots', 8192, help='measurements per sample for simulator-shots')
flags.DEFINE_integer('n_jobs', 1, help='parallel circuit runs')
# experiment
flags.DEFINE_integer('seed', 0, help='base seed, repeat r uses seed + r')
flags.DEFINE_integer('repeats', 1, help='repetitions with re-drawn embeddings')
flags.DEFINE_float('outlier_rate', 0.096, help='validation percentile of the threshold')
# density estimation
flags.DEFINE_list('mixture_weights', ['0.5', '0.5'], help='Gaussian mixture weights')
flags.DEFINE_list('mixture_means', ['-2', '2'], help='Gaussian mixture means')
flags.DEFINE_list('mixture_stds', ['1', '1'], help='Gaussian mixture standard deviations')
flags.DEFINE_integer('num_train', 1000, help='mixture draws used for training')
flags.DEFINE_integer('grid_points', 250, help='equidistant evaluation points')
flags.DEFINE_list('density_embeddings', ['rff', 'aff'], help='embeddings to compare')
flags.DEFINE_integer('rff_candidates', 1,
                     help='RFF draws tried, the best mixed-state fit is kept')
# sweep
flags.DEFINE_list('sweep_embeddings', ['rff'], help='embeddings of the sweep')
flags.DEFINE_list('sweep_dims', ['4'], help='feature dimensions of the sweep')
flags.DEFINE_list('sweep_states', ['mixed'], help='training states of the sweep')
flags.DEFINE_integer('sweep_gamma_min_exp', -10, help='smallest gamma is 2^min_exp')
flags.DEFINE_integer('sweep_gamma_max_exp', 0, help='largest gamma is 2^max_exp')


def split_from_flags():
    return SplitSpec(
        train_frac=FLAGS.split_train, val_frac=FLAGS.split_val,
        test_frac=FLAGS.split_test, stratified=FLAGS.split_stratified,
        seed=FLAGS.split_seed)


def experiment_from_flags():
    return ExperimentConfig(
        data_path=FLAGS.data_path or '',
        label_column=FLAGS.label_column or '',
        outlier_label=FLAGS.outlier_label,
        normal_label=FLAGS.normal_label,
        embedding=FLAGS.embedding,
        params_path=FLAGS.params_path or '',
        state=FLAGS.state,
        dim_features=FLAGS.dim_features,
        gamma=FLAGS.gamma,
        gamma_s=FLAGS.gamma_s,
        aff_epochs=FLAGS.aff_epochs,
        aff_lr=FLAGS.aff_lr,
        aff_beta1=FLAGS.aff_beta1,
        aff_beta2=FLAGS.aff_beta2,
        aff_batch_size=FLAGS.aff_batch_size,
        backend=FLAGS.backend,
        shots=FLAGS.shots,
        seed=FLAGS.seed,
        repeats=FLAGS.repeats,
        outlier_rate=FLAGS.outlier_rate,
        standardize=FLAGS.standardize,
        split=split_from_flags(),
        solver=FLAGS.solver,
        n_jobs=FLAGS.n_jobs,
        verbose=FLAGS.progress)


def density_from_flags():
    return DensityExperimentConfig(
        mixture=mixture_from_lists(
            FLAGS.mixture_weights, FLAGS.mixture_means, FLAGS.mixture_stds),
        num_train=FLAGS.num_train,
        grid_points=FLAGS.grid_points,
        embeddings=tuple(FLAGS.density_embeddings),
        dim_features=FLAGS.dim_features,
        gamma=FLAGS.gamma,
        gamma_s=FLAGS.gamma_s,
        aff_epochs=FLAGS.aff_epochs,
        aff_lr=FLAGS.aff_lr,
        aff_beta1=FLAGS.aff_beta1,
        aff_beta2=FLAGS.aff_beta2,
        aff_batch_size=FLAGS.aff_batch_size,
        rff_candidates=FLAGS.rff_candidates,
        backend=FLAGS.backend,
        shots=FLAGS.shots,
        seed=FLAGS.seed,
        solver=FLAGS.solver,
        n_jobs=FLAGS.n_jobs,
        verbose=FLAGS.progress)


def sweep_grid_from_flags():
    try:
        dims = tuple(int(d) for d in FLAGS.sweep_dims)
    except ValueError as e:
        raise ParameterError('invalid sweep dimension: %s' % e)
    return SweepGrid(
        embeddings=tuple(FLAGS.sweep_embeddings),
        dims=dims,
        states=tuple(FLAGS.sweep_states),
        gamma_exponents=tuple(range(FLAGS.sweep_gamma_min_exp,
                                    FLAGS.sweep_gamma_max_exp + 1)))
