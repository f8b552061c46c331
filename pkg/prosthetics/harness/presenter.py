from typing import Union

import pandas  # type: ignore
from tabulate import tabulate


class ConsolePresenter:
    def __init__(self):
        self._output: str = ''

    def present(self):
        print(self._output)

    def append_header(self, header: str):
        self._append_output(f'\n>>> {header} <<<\n')

    def append_table(self, tabulate_data: Union[list, pandas.DataFrame], headers='keys', **kwargs):
        self._append_output(self._table(tabulate_data, headers, **kwargs))
        self._append_output('\n')

    def _append_output(self, msg: str):
        self._output += msg

    def _table(self, tabulate_data: Union[list, pandas.DataFrame], headers='keys', **kwargs) -> str:
        defaults = {
            'showindex': False,
            'numalign': 'decimal',
            'stralign': 'right',
            'tablefmt': 'presto',
        }
        defaults.update(**kwargs)
        return tabulate(tabulate_data, headers=headers, **defaults)  # type: ignore
