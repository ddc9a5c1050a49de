import inspect

from dpbound.version import __version__


def render_program(program):
    """Surface text of a program; parse(render_program(p)) == p"""
    return str(program)


class ProgramWriter(object):
    @staticmethod
    def write_preamble(file_out, title=None):
        preamble = inspect.cleandoc(f'''
            # dpbound program, written by dpbound {__version__}
            # parameters are the inputs x, the result is the output y
        ''')
        print(preamble, file=file_out)
        if title:
            for line in str(title).splitlines():
                print(f'# {line}', file=file_out)

    def write_program(self, file_out, program, title=None):
        self.write_preamble(file_out, title)
        print(render_program(program), file=file_out)


def write_program(program, file_out, title=None):
    ProgramWriter().write_program(file_out, program, title)
