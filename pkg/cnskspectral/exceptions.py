class RetryableError(Exception):
    """Erro recuperável sem que seja necessário modificar os dados de entrada,
    e.g., quadratura que não convergiu dentro do limite de refinamentos mas que
    convergiria com mais iterações ou com tolerância mais frouxa.
    """


class NonRetryableError(Exception):
    """Erro do qual não pode ser recuperado sem modificar os dados de entrada,
    e.g., parâmetro físico fora do domínio, dado inicial inadmissível etc.
    """


class ParameterDomainError(NonRetryableError):
    """Erro que representa parâmetros fora do domínio de validade: viscosidade
    ou coeficiente de som não positivos, capilaridade negativa, tempos
    negativos, grades cujo tamanho não é potência de 2 ou horizontes que violam
    a guarda da caixa periódica.
    """


class RepresentationMismatch(NonRetryableError):
    """Erro que representa a tentativa de operar sobre um campo na
    representação errada (espectral vs. física).
    """


class InadmissibleData(NonRetryableError):
    """Erro que representa dados iniciais que violam as hipóteses das
    estimativas, e.g., média não nula onde se exige média nula ou campo de
    Stokes com divergente não nulo.
    """


class DegenerateFit(NonRetryableError):
    """Erro que representa uma janela de ajuste com amostras insuficientes.
    """


class UnstableExponent(NonRetryableError):
    """Erro que representa uma acumulação não finita nas integrais em forma
    fechada, sinal de um expoente com parte real positiva.
    """


class QuadratureNotConverged(RetryableError):
    """Erro que representa a quadratura polar adaptativa que não atingiu a
    tolerância dentro do número máximo de refinamentos.
    """


class ConfigurationError(NonRetryableError):
    """Erro que representa uma configuração de experimento inválida.

    O atributo `errors` associa cada diretiva problemática (``secao.chave``) à
    respectiva mensagem, de modo que todos os problemas sejam reportados de uma
    só vez.
    """

    def __init__(self, message, errors=None):
        super().__init__(message)
        self.errors = dict(errors or {})


class AlreadyExists(NonRetryableError):
    """Erro que representa a tentativa de registro de um artefato cujo
    identificador já está em uso.
    """


class DoesNotExist(NonRetryableError):
    """Erro que representa a tentativa de recuperar um artefato à partir
    de um identificador que não está associado a nenhum deles.
    """
