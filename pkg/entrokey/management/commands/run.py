import json

from entrokey.management.base import EntrokeyCommand
from entrokey.pipeline import STAGES, SUMMARY_FILE, run_pipeline


class Command(EntrokeyCommand):
    help = f"Run the whole pipeline ({' -> '.join(STAGES)}) into the output directory"

    def run(self, config, options):
        manifest = run_pipeline(config, lock=False)
        for entry in manifest.stages:
            self.info(f"  {entry['name']:<9} {entry['status']:<6} {len(entry['artifacts'])} artifact(s)")
        summary = json.loads((config.out_dir / SUMMARY_FILE).read_text(encoding='utf-8'))
        check = summary.get('synthetic_check')
        if check is not None:
            self.info(f"  synthetic check: {check['matched']}/{check['decided']} non-neutral labels agree")
        self.success(f'Run complete; manifest at {manifest.path}')
