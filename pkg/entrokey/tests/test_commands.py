"""
Tests for the management commands.
"""

import json
import os
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase

from entrokey.models import PipelineRun

SMALL_SYNTH = {
    'num_pos': 24,
    'num_neg': 24,
    'num_unlabeled': 12,
    'planted_size': 5,
    'shared_size': 5,
    'doc_length': 8,
    'noise_rate': 0.05,
}


class CommandTestCase(TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.out = Path(self.tmp.name)
        environ = mock.patch.dict(os.environ)
        environ.start()
        self.addCleanup(environ.stop)
        os.environ.pop('ENTROKEY_OUT', None)

    def call(self, name, *args, **options):
        stdout = StringIO()
        options.setdefault('out_dir', str(self.out))
        call_command(name, *args, stdout=stdout, **options)
        return stdout.getvalue()

    def write_config(self, text):
        path = self.out / 'run.toml'
        path.write_text(text, encoding='utf-8')
        return str(path)


class StepByStepTest(CommandTestCase):
    """Tests running each stage as its own command."""

    def test_commands_in_sequence(self):
        output = self.call('synth', **SMALL_SYNTH)
        self.assertIn('60 synthetic documents', output)
        self.assertTrue((self.out / 'truth.json').exists())

        self.call('segment')
        self.assertTrue((self.out / 'segmented.jsonl').exists())

        self.call('keywords', alpha_min=1.5, alpha_max=2.0, alpha_step=0.5)
        self.assertTrue((self.out / 'keywords' / 'stats.tsv').exists())
        self.assertTrue((self.out / 'keywords' / 'positive-1.5.tsv').exists())

        output = self.call('grid', alpha_min=2.0, alpha_max=2.0, alpha_step=0.25, k=2)
        self.assertIn('Combined', output)
        self.assertTrue((self.out / 'keywords' / 'combined.tsv').exists())

        combined = str(self.out / 'keywords' / 'combined.tsv')
        negative = str(self.out / 'keywords' / 'best_negative.tsv')
        self.call('train', keywords=combined, target='positive', seed=7, epochs=10)
        self.call('train', keywords=negative, epochs=10)
        header = (self.out / 'models' / 'positive.model').read_text(encoding='utf-8').splitlines()[1]
        self.assertIn('seed=7', header)
        self.assertTrue((self.out / 'models' / 'negative.model').exists())

        output = self.call('eval', keywords=combined, k=2)
        self.assertIn('Accuracy Average', output)

        output = self.call('predict')
        self.assertIn('Labeled 12 documents', output)
        records = [json.loads(line) for line in (self.out / 'labeled.jsonl').read_text(encoding='utf-8').splitlines()]
        self.assertEqual(len(records), 12)

        self.call('report', top_n=3)
        lines = (self.out / 'reports' / 'keywords.tsv').read_text(encoding='utf-8').splitlines()
        self.assertLessEqual(len(lines), 1 + 2 * 3)

    def test_quiet(self):
        self.assertEqual(self.call('synth', quiet=True, **SMALL_SYNTH), '')

    def test_ingest(self):
        source = self.out / 'reviews.jsonl'
        source.write_text(
            json.dumps({'id': 'r1', 'text': '很好。服务差！', 'label': 'positive'}, ensure_ascii=False) + '\n',
            encoding='utf-8',
        )
        self.call('ingest', input=[str(source)])
        ids = [json.loads(line)['id'] for line in (self.out / 'corpus.jsonl').read_text(encoding='utf-8').splitlines()]
        self.assertEqual(ids, ['r1#1', 'r1#2'])


class ExitCodeTest(CommandTestCase):
    """Tests for exit codes of failing commands."""

    def test_config_error(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('synth', config=self.write_config('[train]\nc = -3.0\n'))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_ingest_without_inputs(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('ingest')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_data_error(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('segment', input=str(self.out / 'missing.jsonl'))
        self.assertEqual(ctx.exception.returncode, 3)

    def test_missing_dictionary_in_segment_command(self):
        self.call('synth', **SMALL_SYNTH)
        with self.assertRaises(CommandError) as ctx:
            self.call('segment', mode='max_match')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_stage_failure(self):
        config = self.write_config(
            '[segmenter]\nmode = "max_match"\ndictionary_path = "does-not-exist.txt"\n'
            '[synthetic]\nnum_pos_docs = 12\nnum_neg_docs = 12\nnum_unlabeled = 4\n'
        )
        with self.assertRaises(CommandError) as ctx:
            self.call('run', config=config)
        self.assertEqual(ctx.exception.returncode, 4)
        self.assertIn('[segment]', str(ctx.exception))


class RunCommandTest(CommandTestCase):
    """Tests for the run command."""

    def test_run(self):
        config = self.write_config(
            'seed = 11\n'
            '[synthetic]\nnum_pos_docs = 24\nnum_neg_docs = 24\nnum_unlabeled = 10\n'
            'planted_size = 5\nshared_size = 5\ndoc_length = 8\nnoise_rate = 0.05\n'
            '[keywords]\nalpha_min = 2.0\nalpha_max = 2.0\n'
            '[train]\nepochs = 10\n'
            '[evaluation]\nk = 2\nc_values = [1.0, 3.0]\n'
        )
        output = self.call('run', config=config)
        self.assertIn('Run complete', output)
        self.assertIn('synthetic check', output)
        self.assertTrue((self.out / 'reports' / 'penalty.tsv').exists())
        run = PipelineRun.objects.get()
        self.assertEqual(run.status, PipelineRun.Status.OK)
        self.assertEqual(int(run.seed), 11)


class OutputLockCommandTest(CommandTestCase):
    """Tests that every command takes the output-directory lock."""

    def test_locked_directory_rejects_single_stage_command(self):
        (self.out / '.entrokey.lock').write_text('1', encoding='utf-8')
        with self.assertRaises(CommandError) as ctx:
            self.call('synth', **SMALL_SYNTH)
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertFalse((self.out / 'corpus.jsonl').exists())
        self.assertTrue((self.out / '.entrokey.lock').exists())

    def test_lock_released_after_command(self):
        self.call('synth', **SMALL_SYNTH)
        self.assertFalse((self.out / '.entrokey.lock').exists())
        self.call('segment')
        self.assertTrue((self.out / 'segmented.jsonl').exists())
        self.assertFalse((self.out / '.entrokey.lock').exists())
